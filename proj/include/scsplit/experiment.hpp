#pragma once

#include "error.hpp"
#include "expression.hpp"
#include "field.hpp"
#include "groundstate.hpp"
#include "integrator.hpp"
#include "keyvalue.hpp"
#include "matrix_lab.hpp"
#include "numeric.hpp"
#include "scheme.hpp"
#include "spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace scsplit
{

struct ProblemConfig
{
	cplx alpha = 1.0;
	cplx beta = -1.0;
	std::string potential = "quadratic"; // catalogue id
	std::string potential_expr;          // overrides `potential` when set
	std::string potential_file;          // overrides both when set
	double a = 10.0;
	int d = 1;
	int M = 100;
	double initial_c1 = 1.0;
	double initial_c2 = 0.5;
	std::array<double, 3> initial_center{0.0, 0.0, 0.0};
	bool initial_even = false; // symmetrise the initial state under x -> -x
	bool allow_large = false;  // lift the 3D size guard
};

enum class RunMode
{
	Fixed,
	Adaptive,
	GroundState,
	Converge,
	MatrixLab
};

struct RunConfig
{
	RunMode mode = RunMode::Fixed;
	std::optional<double> h;
	std::vector<double> h_list;
	double t0 = 0.0;
	double T = 1.0;
	double tolerance = 1e-6;
	NormKind norm = NormKind::Euclidean;
	bool relative = false;
	std::optional<double> h0;
	double safety = 1.0;
	std::string reference = "auto"; // auto | gaussian | dense | none
	std::string study = "global";    // global | local | both
	std::optional<double> energy_tolerance;
	std::size_t window = 10;
	std::string model = "spectral"; // matrixlab: spectral | random
	int dimension = 16;             // matrixlab random model size
	bool allow_unstable = false;
	unsigned threads = 1;
	std::uint64_t seed = 1;
};

struct OutputConfig
{
	std::filesystem::path dir = ".";
	std::string prefix;
	bool dump_state = false;
	bool gnuplot = false; // also write whitespace-separated .dat copies
};

struct ExperimentConfig
{
	ProblemConfig problem;
	std::string scheme = "strang";
	RunConfig run;
	OutputConfig output;
	std::filesystem::path base_dir = "."; // relative scheme/potential paths resolve here

	static ExperimentConfig parse(std::string_view text, std::filesystem::path base_dir = ".");
	static ExperimentConfig load(const std::filesystem::path& path);
};

inline std::string_view to_string(RunMode m)
{
	switch(m)
	{
	case RunMode::Fixed: return "fixed";
	case RunMode::Adaptive: return "adaptive";
	case RunMode::GroundState: return "groundstate";
	case RunMode::Converge: return "converge";
	case RunMode::MatrixLab: return "matrixlab";
	}
	return "fixed";
}

namespace detail
{

inline bool parse_bool(const std::string& v)
{
	if(v == "true" || v == "1" || v == "yes" || v == "on")
	{
		return true;
	}
	if(v == "false" || v == "0" || v == "no" || v == "off")
	{
		return false;
	}
	throw ParseError("expected a boolean, got '" + v + "'");
}

inline std::vector<double> parse_list(const std::string& v)
{
	std::vector<double> out;
	std::string item;
	std::istringstream in(v);
	while(std::getline(in, item, ','))
	{
		if(!trim(item).empty())
		{
			out.push_back(parse_real(item));
		}
	}
	return out;
}

inline int parse_int(const std::string& v)
{
	const double x = parse_real(v);
	if(x != std::floor(x) || std::abs(x) > 1e9)
	{
		throw ParseError("expected an integer, got '" + v + "'");
	}
	return static_cast<int>(x);
}

} // namespace detail

inline ExperimentConfig ExperimentConfig::parse(std::string_view text, std::filesystem::path base_dir)
{
	const auto doc = KeyValueDocument::parse(text);
	if(!doc.data_lines().empty())
	{
		throw ParseError("line " + std::to_string(doc.data_lines().front().line) + ": expected key=value");
	}
	ExperimentConfig c;
	c.base_dir = std::move(base_dir);
	using Setter = std::function<void(const std::string&)>;
	auto& p = c.problem;
	auto& r = c.run;
	auto& o = c.output;
	const std::map<std::string, std::map<std::string, Setter>> table = {
		{"problem",
			{
				{"alpha", [&](const std::string& v) { p.alpha = parse_complex(v); }},
				{"beta", [&](const std::string& v) { p.beta = parse_complex(v); }},
				{"potential", [&](const std::string& v) { p.potential = v; }},
				{"potential_expr", [&](const std::string& v) { p.potential_expr = v; }},
				{"potential_file", [&](const std::string& v) { p.potential_file = v; }},
				{"a", [&](const std::string& v) { p.a = parse_real(v); }},
				{"d", [&](const std::string& v) { p.d = detail::parse_int(v); }},
				{"M", [&](const std::string& v) { p.M = detail::parse_int(v); }},
				{"initial_c1", [&](const std::string& v) { p.initial_c1 = parse_real(v); }},
				{"initial_c2", [&](const std::string& v) { p.initial_c2 = parse_real(v); }},
				{"initial_center",
					[&](const std::string& v) {
						const auto xs = detail::parse_list(v);
						if(xs.empty() || xs.size() > 3)
						{
							throw ParseError("initial_center needs 1 to 3 coordinates");
						}
						p.initial_center = {0.0, 0.0, 0.0};
						std::copy(xs.begin(), xs.end(), p.initial_center.begin());
					}},
				{"initial_even", [&](const std::string& v) { p.initial_even = detail::parse_bool(v); }},
				{"allow_large", [&](const std::string& v) { p.allow_large = detail::parse_bool(v); }},
			}},
		{"scheme",
			{
				{"name", [&](const std::string& v) { c.scheme = v; }},
			}},
		{"run",
			{
				{"mode",
					[&](const std::string& v) {
						static const std::map<std::string, RunMode> modes = {{"fixed", RunMode::Fixed}, {"adaptive", RunMode::Adaptive},
							{"groundstate", RunMode::GroundState}, {"converge", RunMode::Converge}, {"matrixlab", RunMode::MatrixLab}};
						const auto it = modes.find(v);
						if(it == modes.end())
						{
							throw ValidationError("unknown run mode '" + v + "'; valid: fixed adaptive groundstate converge matrixlab");
						}
						r.mode = it->second;
					}},
				{"h", [&](const std::string& v) { r.h = parse_real(v); }},
				{"h_list", [&](const std::string& v) { r.h_list = detail::parse_list(v); }},
				{"t0", [&](const std::string& v) { r.t0 = parse_real(v); }},
				{"T", [&](const std::string& v) { r.T = parse_real(v); }},
				{"tolerance", [&](const std::string& v) { r.tolerance = parse_real(v); }},
				{"norm",
					[&](const std::string& v) {
						if(v == "euclidean" || v == "2")
						{
							r.norm = NormKind::Euclidean;
						}
						else if(v == "maximum" || v == "inf")
						{
							r.norm = NormKind::Maximum;
						}
						else
						{
							throw ValidationError("unknown norm '" + v + "'; valid: euclidean maximum");
						}
					}},
				{"relative", [&](const std::string& v) { r.relative = detail::parse_bool(v); }},
				{"h0", [&](const std::string& v) { r.h0 = parse_real(v); }},
				{"safety", [&](const std::string& v) { r.safety = parse_real(v); }},
				{"reference", [&](const std::string& v) { r.reference = v; }},
				{"study", [&](const std::string& v) { r.study = v; }},
				{"energy_tolerance", [&](const std::string& v) { r.energy_tolerance = parse_real(v); }},
				{"window", [&](const std::string& v) { r.window = static_cast<std::size_t>(detail::parse_int(v)); }},
				{"model", [&](const std::string& v) { r.model = v; }},
				{"dimension", [&](const std::string& v) { r.dimension = detail::parse_int(v); }},
				{"allow_unstable", [&](const std::string& v) { r.allow_unstable = detail::parse_bool(v); }},
				{"threads", [&](const std::string& v) { r.threads = static_cast<unsigned>(detail::parse_int(v)); }},
				{"seed", [&](const std::string& v) { r.seed = static_cast<std::uint64_t>(parse_real(v)); }},
			}},
		{"output",
			{
				{"dir", [&](const std::string& v) { o.dir = v; }},
				{"prefix", [&](const std::string& v) { o.prefix = v; }},
				{"dump_state", [&](const std::string& v) { o.dump_state = detail::parse_bool(v); }},
				{"gnuplot", [&](const std::string& v) { o.gnuplot = detail::parse_bool(v); }},
			}},
	};
	for(const auto& [section, key] : doc.keys())
	{
		const auto sec = table.find(section);
		if(sec == table.end())
		{
			throw ValidationError(section.empty() ? "key '" + key + "' outside a section" : "unknown section [" + section + "]");
		}
		const auto setter = sec->second.find(key);
		if(setter == sec->second.end())
		{
			throw ValidationError("unknown key '" + key + "' in [" + section + "]");
		}
		try
		{
			setter->second(*doc.get(section, key));
		}
		catch(const ParseError& e)
		{
			throw ParseError("[" + section + "] " + key + ": " + e.what());
		}
	}
	return c;
}

inline ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if(!in)
	{
		throw ValidationError("cannot open config '" + path.string() + "'");
	}
	std::stringstream buf;
	buf << in.rdbuf();
	return parse(buf.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

/// Command-line overrides and process-wide settings.
struct RunContext
{
	std::optional<std::filesystem::path> out_dir;
	std::optional<unsigned> threads;
	bool allow_unstable = false;
	std::optional<std::uint64_t> seed;
	std::ostream* log = nullptr;
};

/// Everything a run needs, resolved and validated before anything is written.
struct PreparedRun
{
	ExperimentConfig config;
	GridPtr grid;
	std::optional<ProblemSpec> spec;
	std::optional<Field> initial;
	std::optional<SplittingScheme> scheme;
	std::filesystem::path out_dir;
	std::string prefix;
	bool allow_unstable = false;
	unsigned threads = 1;
	std::uint64_t seed = 1;
};

namespace detail
{

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p)
{
	const std::filesystem::path path(p);
	return path.is_absolute() ? path : base / path;
}

inline SplittingScheme resolve_config_scheme(const ExperimentConfig& c)
{
	const std::string name = canonical_scheme_name(c.scheme);
	const auto& names = builtin_names();
	if(std::find(names.begin(), names.end(), name) != names.end())
	{
		return builtin(name);
	}
	const auto path = resolve_path(c.base_dir, c.scheme);
	if(std::filesystem::exists(path))
	{
		return load_scheme(path);
	}
	return builtin(c.scheme); // throws the catalogue-miss error
}

inline Field even_part(const Field& f)
{
	const auto& g = f.grid();
	Field out = f;
	const int m = g.modes();
	for(std::size_t k = 0; k < f.size(); ++k)
	{
		std::size_t mirror = 0;
		for(int axis = 0; axis < g.dim(); ++axis)
		{
			const int j = g.node_index(k, axis);
			mirror = mirror * static_cast<std::size_t>(m) + static_cast<std::size_t>((m - j) % m);
		}
		out[k] = 0.5 * (f[k] + f[mirror]);
	}
	return out;
}

inline bool gaussian_reference_applies(const ExperimentConfig& c)
{
	const auto& p = c.problem;
	return p.potential_expr.empty() && p.potential_file.empty() && p.potential == "quadratic" && p.alpha.imag() == 0.0 &&
		p.alpha.real() > 0.0 && p.beta.imag() == 0.0 && p.initial_center == std::array<double, 3>{0.0, 0.0, 0.0};
}

inline bool dense_reference_applies(const ExperimentConfig& c)
{
	return c.problem.d == 1 && c.problem.M <= 512 && c.problem.alpha.imag() == 0.0 && c.problem.beta.imag() == 0.0;
}

} // namespace detail

inline PreparedRun prepare_run(const ExperimentConfig& c, const RunContext& ctx = {})
{
	PreparedRun pr;
	pr.config = c;
	const auto& p = c.problem;
	const auto& r = c.run;
	if(p.d < 1 || p.d > 3)
	{
		throw ValidationError("[problem] d must be 1, 2 or 3");
	}
	if(p.M < 2 || p.M % 2 != 0)
	{
		throw ValidationError("[problem] M must be even and at least 2");
	}
	if(p.d == 3 && p.M > 64 && !p.allow_large)
	{
		throw ValidationError("[problem] 3D runs above M = 64 need allow_large = true");
	}
	pr.allow_unstable = r.allow_unstable || ctx.allow_unstable;
	pr.threads = ctx.threads.value_or(r.threads);
	pr.seed = ctx.seed.value_or(r.seed);
	pr.out_dir = ctx.out_dir.value_or(c.output.dir);
	pr.prefix = c.output.prefix.empty() ? std::string(to_string(r.mode)) : c.output.prefix;
	pr.scheme = detail::resolve_config_scheme(c);

	const bool random_model = r.mode == RunMode::MatrixLab && r.model == "random";
	if(r.mode == RunMode::MatrixLab && r.model != "random" && r.model != "spectral")
	{
		throw ValidationError("[run] model must be spectral or random");
	}
	if(!random_model)
	{
		pr.grid = make_grid(p.a, p.d, p.M);
		std::vector<double> v;
		if(!p.potential_file.empty())
		{
			v = sample_potential(*pr.grid, load_potential_file(detail::resolve_path(c.base_dir, p.potential_file)));
		}
		else if(!p.potential_expr.empty())
		{
			v = sample_potential(*pr.grid, Expression::parse(p.potential_expr));
		}
		else
		{
			v = sample_potential(*pr.grid, p.potential);
		}
		pr.spec.emplace(pr.grid, p.alpha, p.beta, std::move(v));
		Field u0 = sample_gaussian(pr.grid, p.initial_c1, p.initial_c2, p.initial_center);
		pr.initial = p.initial_even ? detail::even_part(u0) : u0;
		check_stability_guard(*pr.scheme, *pr.spec, pr.allow_unstable);
	}
	else
	{
		if(r.dimension < 1 || r.dimension > 512)
		{
			throw ValidationError("[run] dimension must be in 1..512");
		}
		if(!pr.allow_unstable && !pr.scheme->parabolic_stable())
		{
			throw StabilityError("scheme '" + pr.scheme->name() + "' has negative Re(a_j); pass the allow-unstable override");
		}
	}

	const auto need_h = [&] {
		if(!r.h || !(*r.h > 0.0))
		{
			throw ValidationError("[run] h must be given and positive for mode " + std::string(to_string(r.mode)));
		}
	};
	const auto need_divides = [&](double h, double span) {
		const double n = std::round(span / h);
		if(n < 1 || std::abs(n * h - span) > 1e-9 * span)
		{
			throw ValidationError("[run] h = " + format_real(h) + " does not divide the interval length " + format_real(span));
		}
	};
	if(!(r.T > r.t0))
	{
		throw ValidationError("[run] T must exceed t0");
	}
	switch(r.mode)
	{
	case RunMode::Fixed:
		need_h();
		need_divides(*r.h, r.T - r.t0);
		break;
	case RunMode::GroundState:
		need_h();
		need_divides(*r.h, r.T);
		if(!pr.spec->is_real())
		{
			throw ValidationError("groundstate mode needs real alpha and beta");
		}
		break;
	case RunMode::MatrixLab:
		need_h();
		need_divides(*r.h, r.T);
		if(!random_model && !detail::dense_reference_applies(c))
		{
			throw ValidationError("matrixlab mode needs d = 1, M <= 512 and real alpha, beta");
		}
		break;
	case RunMode::Adaptive:
		if(!(r.tolerance > 0.0))
		{
			throw ValidationError("[run] tolerance must be positive");
		}
		if(pr.scheme->scheme_class() != SchemeClass::SymmetricConjugate)
		{
			throw ValidationError("adaptive mode needs a symmetric-conjugate scheme; '" + pr.scheme->name() + "' is " +
				std::string(to_string(pr.scheme->scheme_class())));
		}
		if(!pr.spec->is_real())
		{
			throw ValidationError("adaptive mode needs real alpha and beta");
		}
		break;
	case RunMode::Converge:
		if(r.h_list.size() < 2)
		{
			throw ValidationError("[run] h_list needs at least two step sizes");
		}
		for(double h : r.h_list)
		{
			if(!(h > 0.0))
			{
				throw ValidationError("[run] h_list entries must be positive");
			}
			if(r.study != "local")
			{
				need_divides(h, r.T - r.t0);
			}
		}
		if(r.study != "global" && r.study != "local" && r.study != "both")
		{
			throw ValidationError("[run] study must be global, local or both");
		}
		break;
	}
	if(r.mode == RunMode::Converge || r.mode == RunMode::Adaptive || r.mode == RunMode::Fixed)
	{
		const auto& ref = r.reference;
		if(ref != "auto" && ref != "gaussian" && ref != "dense" && ref != "none")
		{
			throw ValidationError("[run] reference must be auto, gaussian, dense or none");
		}
		if(ref == "gaussian" && !detail::gaussian_reference_applies(c))
		{
			throw ValidationError("gaussian reference needs the quadratic potential, real alpha > 0, real beta and a centred initial state");
		}
		if(ref == "dense" && !detail::dense_reference_applies(c))
		{
			throw ValidationError("dense reference needs d = 1, M <= 512 and real alpha, beta");
		}
		if(r.mode == RunMode::Converge && (ref == "none" || (ref == "auto" && !detail::gaussian_reference_applies(c) && !detail::dense_reference_applies(c))))
		{
			throw ValidationError("converge mode needs a reference solution (gaussian or dense)");
		}
		if(ref == "gaussian" || (ref == "auto" && detail::gaussian_reference_applies(c)))
		{
			const GaussianAnsatz g(p.alpha.real(), p.beta.real(), p.initial_c2, p.initial_c1, p.d);
			if(r.T >= g.blowup_time())
			{
				throw ValidationError("T = " + format_real(r.T) + " is past the blow-up time " + format_real(g.blowup_time()) + " of the Gaussian solution");
			}
		}
	}
	return pr;
}

namespace detail
{

/// Reference solution u(t) for a prepared run, or empty when none applies.
inline ReferenceFn reference_for(const PreparedRun& pr)
{
	const auto& c = pr.config;
	const auto& ref = c.run.reference;
	if(ref == "none")
	{
		return {};
	}
	if(ref == "gaussian" || (ref == "auto" && gaussian_reference_applies(c)))
	{
		const GaussianAnsatz g(c.problem.alpha.real(), c.problem.beta.real(), c.problem.initial_c2, c.problem.initial_c1, c.problem.d);
		const auto grid = pr.grid;
		const double t0 = c.run.t0;
		return [g, grid, t0](double t) { return g.sample(grid, t - t0); };
	}
	if(ref == "dense" || (ref == "auto" && dense_reference_applies(c)))
	{
		auto model = std::make_shared<const DenseModel>(from_spectral_1d(*pr.spec));
		const auto grid = pr.grid;
		const ComplexVector u0 = to_real_vector(*pr.initial).cast<cplx>();
		const double t0 = c.run.t0;
		return [model, grid, u0, t0](double t) {
			const ComplexVector u = exact_propagator(*model, t - t0).matrix * u0;
			Field f(grid);
			for(std::size_t k = 0; k < f.size(); ++k)
			{
				f[k] = u[static_cast<Eigen::Index>(k)];
			}
			return f;
		};
	}
	return {};
}

inline std::ofstream open_output(const std::filesystem::path& path)
{
	std::ofstream out(path);
	if(!out)
	{
		throw ValidationError("cannot write '" + path.string() + "'");
	}
	return out;
}

/// Writes a CSV table and, when asked, the same columns space-separated
/// with a `#` header line for gnuplot.
inline void write_table(const std::filesystem::path& path, const std::function<void(std::ostream&)>& writer, bool gnuplot)
{
	std::ostringstream buf;
	writer(buf);
	const std::string csv = buf.str();
	open_output(path) << csv;
	if(gnuplot)
	{
		auto dat = path;
		dat.replace_extension(".dat");
		std::string text = "# " + csv;
		std::replace(text.begin(), text.end(), ',', ' ');
		open_output(dat) << text;
	}
}

inline std::string summary_value(double v)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "%.6g", v);
	return buf;
}

} // namespace detail

/// Runs a prepared configuration; returns the summary lines it printed.
inline std::vector<std::string> execute_run(const PreparedRun& pr, std::ostream& log)
{
	const auto& c = pr.config;
	const auto& r = c.run;
	const auto& scheme = *pr.scheme;
	std::filesystem::create_directories(pr.out_dir);
	const auto file = [&](const std::string& suffix) { return pr.out_dir / (pr.prefix + suffix); };
	std::vector<std::string> lines;
	const auto say = [&](const std::string& s) {
		log << s << "\n";
		lines.push_back(s);
	};
	switch(r.mode)
	{
	case RunMode::Fixed:
	{
		const double span = r.T - r.t0;
		const auto n = static_cast<std::size_t>(std::round(span / *r.h));
		const auto [u, trace] = propagate(scheme, *pr.spec, *pr.initial, span / static_cast<double>(n), n, {pr.allow_unstable, r.t0});
		detail::write_table(file("_trace.csv"), [&](std::ostream& o) { trace.write_csv(o); }, c.output.gnuplot);
		std::string line = "fixed scheme=" + scheme.name() + " h=" + detail::summary_value(*r.h) + " steps=" + std::to_string(n) +
			" relimag=" + detail::summary_value(relative_imag_2(u)) +
			" norm_ratio=" + format_real(u.norm() / pr.initial->norm());
		if(const auto ref = detail::reference_for(pr))
		{
			line += " global_error=" + detail::summary_value(relative_distance(u, ref(r.T)));
		}
		if(c.output.dump_state)
		{
			write_field(u, file("_state.bin"));
		}
		say(line);
		break;
	}
	case RunMode::Adaptive:
	{
		AdaptiveOptions opt;
		opt.tolerance = r.tolerance;
		opt.norm = r.norm;
		opt.h0 = r.h0;
		opt.safety = r.safety;
		opt.relative = r.relative;
		opt.exact = detail::reference_for(pr);
		const auto [u, trace] = adaptive_propagate(scheme, *pr.spec, *pr.initial, r.t0, r.T, opt);
		detail::write_table(file("_trace.csv"), [&](std::ostream& o) { trace.write_csv(o); }, c.output.gnuplot);
		std::string line = "adaptive scheme=" + scheme.name() + " tol=" + detail::summary_value(r.tolerance) +
			" norm=" + (r.norm == NormKind::Euclidean ? "euclidean" : "maximum") + " accepted=" + std::to_string(trace.accepted_count()) +
			" rejected=" + std::to_string(trace.rejected_count());
		if(opt.exact)
		{
			line += " global_error=" + detail::summary_value(relative_distance(u, opt.exact(r.T)));
		}
		if(c.output.dump_state)
		{
			write_field(u, file("_state.bin"));
		}
		say(line);
		break;
	}
	case RunMode::GroundState:
	{
		GroundStateOptions opt;
		opt.allow_unstable = pr.allow_unstable;
		opt.energy_tolerance = r.energy_tolerance;
		opt.window = r.window;
		const auto res = imaginary_time_groundstate(scheme, *pr.spec, *pr.initial, *r.h, r.T, opt);
		std::optional<double> e_ref;
		if(detail::dense_reference_applies(c))
		{
			e_ref = dominant_eigenpair(from_spectral_1d(*pr.spec)).e0;
		}
		detail::write_table(file("_energy.csv"), [&](std::ostream& o) { res.write_csv(o, e_ref.value_or(res.energy)); }, c.output.gnuplot);
		if(c.output.dump_state)
		{
			write_field(res.state, file("_state.bin"));
		}
		std::string line = "groundstate scheme=" + scheme.name() + " h=" + detail::summary_value(*r.h) + " T=" + detail::summary_value(r.T) +
			" steps=" + std::to_string(res.steps) + " E0=" + format_real(res.energy);
		if(e_ref)
		{
			line += " dense_E0=" + format_real(*e_ref) + " difference=" + detail::summary_value(std::abs(res.energy - *e_ref));
		}
		say(line);
		break;
	}
	case RunMode::Converge:
	{
		const auto ref = detail::reference_for(pr);
		StudyOptions opt{r.t0, pr.allow_unstable, pr.threads};
		const auto report_line = [&](const ConvergenceReport& rep, const std::string& kind) {
			std::string line = "converge scheme=" + scheme.name() + " study=" + kind + " eoc=";
			for(std::size_t i = 0; i < rep.eoc.size(); ++i)
			{
				line += (i ? "," : "") + detail::summary_value(rep.eoc[i]);
			}
			line += " fitted=" + detail::summary_value(rep.fitted_slope());
			if(std::isfinite(rep.fitted_imag_slope()))
			{
				line += " imag_fitted=" + detail::summary_value(rep.fitted_imag_slope());
			}
			const auto flagged = std::count(rep.unstable.begin(), rep.unstable.end(), true);
			if(flagged > 0)
			{
				line += " unstable_entries=" + std::to_string(flagged);
			}
			return line;
		};
		if(r.study == "global" || r.study == "both")
		{
			const auto rep = global_error_study(scheme, *pr.spec, *pr.initial, r.T, r.h_list, ref, opt);
			detail::write_table(file("_global.csv"), [&](std::ostream& o) { rep.write_csv(o); }, c.output.gnuplot);
			say(report_line(rep, "global"));
		}
		if(r.study == "local" || r.study == "both")
		{
			const auto rep = local_error_study(scheme, *pr.spec, *pr.initial, r.h_list, ref, opt);
			detail::write_table(file("_local.csv"), [&](std::ostream& o) { rep.write_csv(o); }, c.output.gnuplot);
			say(report_line(rep, "local"));
		}
		break;
	}
	case RunMode::MatrixLab:
	{
		const bool random_model = r.model == "random";
		std::optional<DenseModel> model;
		RealVector u0;
		if(random_model)
		{
			std::mt19937_64 rng(pr.seed);
			const RealMatrix a = random_symmetric(r.dimension, rng);
			const RealMatrix b = random_symmetric(r.dimension, rng);
			model.emplace(a, b);
			u0 = RealVector::Ones(r.dimension).normalized();
		}
		else
		{
			model.emplace(from_spectral_1d(*pr.spec));
			u0 = to_real_vector(*pr.initial);
		}
		const auto n = static_cast<std::size_t>(std::round(r.T / *r.h));
		const auto series = imaginary_dynamics(*model, scheme, *r.h, u0, n);
		detail::write_table(file("_series.csv"), [&](std::ostream& o) { series.write_csv(o); }, c.output.gnuplot);
		const auto prop = scheme_propagator(*model, scheme, *r.h);
		if(c.output.dump_state)
		{
			write_matrix(prop.matrix, file("_propagator.bin"));
		}
		const auto dom = dominant_eigenpair(*model);
		std::string line = "matrixlab scheme=" + scheme.name() + " model=" + r.model + (random_model ? " seed=" + std::to_string(pr.seed) : "") +
			" h=" + detail::summary_value(*r.h) + " steps=" + std::to_string(n) + " E0=" + format_real(dom.e0) +
			" selfadjointness_defect=" + detail::summary_value(selfadjointness_defect(prop)) +
			" max_relimag=" + detail::summary_value(*std::max_element(series.relimag.begin(), series.relimag.end())) +
			" final_energy_err=" + detail::summary_value(series.energy_err.back());
		if(dom.near_degenerate)
		{
			line += " warning=near-degenerate";
		}
		if(series.truncated)
		{
			line += " truncated=true";
		}
		say(line);
		break;
	}
	}
	return lines;
}

inline std::vector<std::string> run_experiment(const ExperimentConfig& c, const RunContext& ctx = {})
{
	std::ostream& log = ctx.log ? *ctx.log : std::clog;
	return execute_run(prepare_run(c, ctx), log);
}

/// Reproduction manifest: key=value text with one section per produced table.
class Manifest
{
public:
	explicit Manifest(std::string id) { text_ << "id=" << id << "\n"; }

	void set(const std::string& key, const std::string& value) { text_ << key << "=" << value << "\n"; }

	void begin_entry()
	{
		++entries_;
		text_ << "\n[entry " << entries_ << "]\n";
	}

	void write(const std::filesystem::path& path) const
	{
		auto out = detail::open_output(path);
		out << text_.str();
	}

private:
	std::ostringstream text_;
	int entries_ = 0;
};

inline const std::vector<std::string>& reproduce_ids()
{
	static const std::vector<std::string> ids = {"model1", "model2-quadratic", "model2-quartic", "adaptive-p3", "adaptive-p6"};
	return ids;
}

namespace detail
{

inline std::string tag(double v)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "%g", v);
	return buf;
}

inline void reproduce_model1(const std::filesystem::path& out, std::ostream& log)
{
	const double T = 100.0;
	const auto grid = make_grid(10.0, 1, 256);
	const ProblemSpec spec(grid, 0.5, -1.0, sample_potential(*grid, "quartic"));
	const DenseModel model = from_spectral_1d(spec);
	const RealVector u0 = to_real_vector(sample_gaussian(grid, std::pow(std::numbers::pi, -0.25), 0.5, {1.0, 0.0, 0.0}));
	const auto dom = dominant_eigenpair(model);
	Manifest m("model1");
	m.set("problem", "alpha=0.5 beta=-1 V=5-x^2/2+x^4/80 a=10 M=256");
	m.set("initial", "pi^(-1/4) exp(-(x-1)^2/2)");
	m.set("T", format_real(T));
	m.set("E0", format_real(dom.e0));
	m.set("E0_minus_E1", format_real(dom.gap));
	for(const std::string name : {"cs-4-4", "cs-6", "sc-4-4", "sc-6"})
	{
		const auto s = builtin(name);
		for(const std::size_t n : {std::size_t{40}, std::size_t{400}})
		{
			const double h = T / static_cast<double>(n);
			const auto series = imaginary_dynamics(model, s, h, u0, n);
			const std::string fname = "model1_" + name + "_N" + std::to_string(n) + ".csv";
			detail::write_table(out / fname, [&](std::ostream& o) { series.write_csv(o); }, true);
			m.begin_entry();
			m.set("scheme", name);
			m.set("class", std::string(to_string(s.scheme_class())));
			m.set("h", format_real(h));
			m.set("steps", std::to_string(n));
			m.set("file", fname);
			log << "model1 " << name << " N=" << n << " relimag(N)=" << summary_value(series.relimag.back())
				<< " energy_err(N)=" << summary_value(series.energy_err.back()) << "\n";
		}
	}
	m.write(out / "model1_manifest.txt");
}

inline void reproduce_model2(const std::string& which, const std::filesystem::path& out, unsigned threads, std::ostream& log)
{
	const bool quadratic = which == "quadratic";
	const auto grid = make_grid(10.0, 1, 100);
	const auto v = quadratic ? sample_potential(*grid, "quadratic")
							 : sample_potential(*grid, Expression::parse("x1^4/24"));
	const ProblemSpec spec(grid, 1.0, -1.0, v);
	const Field u0 = sample_gaussian(grid, 1.0, 0.5);
	const double T = 1.0;
	ReferenceFn ref;
	if(quadratic)
	{
		ref = [grid](double t) { return exact_gaussian_oracle(t, grid); };
	}
	else
	{
		auto model = std::make_shared<const DenseModel>(from_spectral_1d(spec));
		const ComplexVector x0 = to_real_vector(u0).cast<cplx>();
		ref = [model, grid, x0](double t) {
			const ComplexVector u = exact_propagator(*model, t).matrix * x0;
			Field f(grid);
			for(std::size_t k = 0; k < f.size(); ++k)
			{
				f[k] = u[static_cast<Eigen::Index>(k)];
			}
			return f;
		};
	}
	std::vector<double> hs;
	for(int n : {2, 4, 8, 16, 32, 64, 128, 256})
	{
		hs.push_back(T / n);
	}
	const std::string id = "model2-" + which;
	Manifest m(id);
	m.set("problem", std::string("alpha=1 beta=-1 V=") + (quadratic ? "x^2" : "x^4/24") + " a=10 M=100");
	m.set("initial", "exp(-x^2/2)");
	m.set("T", format_real(T));
	m.set("reference", quadratic ? "Gaussian ansatz (exact)" : "dense exponential of the discretised operator");
	std::string hlist;
	for(double h : hs)
	{
		hlist += (hlist.empty() ? "" : ",") + format_real(h);
	}
	m.set("h_list", hlist);
	StudyOptions opt{0.0, true, threads};
	// the dense reference is good to about 5e-13
	opt.error_floor = quadratic ? 1e-13 : 1e-11;
	m.set("fit_error_floor", format_real(opt.error_floor));
	for(const auto& name : builtin_names())
	{
		const auto s = builtin(name);
		const auto global = global_error_study(s, spec, u0, T, hs, ref, opt);
		const auto local = local_error_study(s, spec, u0, hs, ref, opt);
		const std::string gname = id + "_" + name + "_global.csv";
		const std::string lname = id + "_" + name + "_local.csv";
		detail::write_table(out / gname, [&](std::ostream& o) { global.write_csv(o); }, true);
		detail::write_table(out / lname, [&](std::ostream& o) { local.write_csv(o); }, true);
		m.begin_entry();
		m.set("scheme", name);
		m.set("order", std::to_string(s.order()));
		m.set("stages", std::to_string(s.stages()));
		m.set("global_file", gname);
		m.set("local_file", lname);
		m.set("global_fitted_order", format_real(global.fitted_slope()));
		m.set("local_fitted_order", format_real(local.fitted_slope()));
		log << id << " " << name << " global_fit=" << summary_value(global.fitted_slope())
			<< " imag_fit=" << summary_value(global.fitted_imag_slope()) << " local_fit=" << summary_value(local.fitted_slope()) << "\n";
	}
	m.write(out / (id + "_manifest.txt"));
}

inline void reproduce_adaptive(int order, const std::filesystem::path& out, std::ostream& log)
{
	const auto grid = make_grid(10.0, 1, 100);
	const ProblemSpec spec(grid, 1.0, -1.0, sample_potential(*grid, "quadratic"));
	const Field u0 = sample_gaussian(grid, 1.0, 0.5);
	const auto s = builtin(order == 3 ? "sc-3-3" : "sc-6");
	const std::vector<double> tols = order == 3 ? std::vector<double>{1e-6, 1e-10} : std::vector<double>{1e-10, 1e-12};
	const std::string id = "adaptive-p" + std::to_string(order);
	Manifest m(id);
	m.set("problem", "alpha=1 beta=-1 V=x^2 a=10 M=100");
	m.set("scheme", s.name());
	m.set("t0", "0");
	m.set("T", "1");
	m.set("controller", "absolute estimate, safety 1, clamp [0.2, 5], h0 = (T - t0)/10");
	for(const auto norm : {NormKind::Euclidean, NormKind::Maximum})
	{
		const std::string nname = norm == NormKind::Euclidean ? "euclidean" : "maximum";
		for(double tol : tols)
		{
			AdaptiveOptions opt;
			opt.tolerance = tol;
			opt.norm = norm;
			opt.exact = [grid](double t) { return exact_gaussian_oracle(t, grid); };
			const auto [u, trace] = adaptive_propagate(s, spec, u0, 0.0, 1.0, opt);
			const std::string fname = id + "_" + nname + "_tol" + tag(tol) + ".csv";
			detail::write_table(out / fname, [&](std::ostream& o) { trace.write_csv(o); }, true);
			const double gerr = relative_distance(u, exact_gaussian_oracle(1.0, grid));
			m.begin_entry();
			m.set("norm", nname);
			m.set("tolerance", format_real(tol));
			m.set("accepted", std::to_string(trace.accepted_count()));
			m.set("rejected", std::to_string(trace.rejected_count()));
			m.set("global_error", format_real(gerr));
			m.set("file", fname);
			log << id << " norm=" << nname << " tol=" << tag(tol) << " accepted=" << trace.accepted_count()
				<< " rejected=" << trace.rejected_count() << " global_error=" << summary_value(gerr) << "\n";
		}
	}
	m.write(out / (id + "_manifest.txt"));
}

} // namespace detail

inline void reproduce(const std::string& id, const std::filesystem::path& out, unsigned threads, std::ostream& log)
{
	const auto& ids = reproduce_ids();
	if(std::find(ids.begin(), ids.end(), id) == ids.end())
	{
		std::string msg = "unknown figure id '" + id + "'; valid:";
		for(const auto& i : ids)
		{
			msg += " " + i;
		}
		throw ValidationError(msg);
	}
	std::filesystem::create_directories(out);
	if(id == "model1")
	{
		detail::reproduce_model1(out, log);
	}
	else if(id == "model2-quadratic")
	{
		detail::reproduce_model2("quadratic", out, threads, log);
	}
	else if(id == "model2-quartic")
	{
		detail::reproduce_model2("quartic", out, threads, log);
	}
	else
	{
		detail::reproduce_adaptive(id == "adaptive-p3" ? 3 : 6, out, log);
	}
}

struct SchemeListing
{
	std::string name;
	std::string origin; // "builtin" or a file path
	std::optional<SplittingScheme> scheme;
	std::string note;   // load failure or placeholder notice
};

inline std::vector<SchemeListing> list_schemes(const std::optional<std::filesystem::path>& scheme_dir)
{
	std::vector<SchemeListing> out;
	for(const auto& name : builtin_names())
	{
		out.push_back({name, "builtin", builtin(name), {}});
	}
	if(scheme_dir && std::filesystem::is_directory(*scheme_dir))
	{
		std::vector<std::filesystem::path> files;
		for(const auto& e : std::filesystem::directory_iterator(*scheme_dir))
		{
			if(e.path().extension() == ".scheme")
			{
				files.push_back(e.path());
			}
		}
		std::sort(files.begin(), files.end());
		for(const auto& f : files)
		{
			SchemeListing l{f.stem().string(), f.string(), std::nullopt, {}};
			try
			{
				l.scheme = load_scheme(f);
				l.name = l.scheme->name();
			}
			catch(const ValidationError& e)
			{
				const std::string what = e.what();
				l.note = what.find("placeholder") != std::string::npos ? "placeholder, no coefficients" : what;
			}
			out.push_back(std::move(l));
		}
	}
	return out;
}

inline void print_scheme_table(const std::vector<SchemeListing>& rows, std::ostream& out)
{
	char buf[256];
	std::snprintf(buf, sizeof buf, "%-12s %3s %3s  %-20s %-16s %-22s %s\n", "name", "p", "s", "class", "parabolic_stable",
		"schrodinger_positive_a", "origin");
	out << buf;
	for(const auto& r : rows)
	{
		if(!r.scheme)
		{
			std::snprintf(buf, sizeof buf, "%-12s %3s %3s  %-20s %-16s %-22s %s (%s)\n", r.name.c_str(), "-", "-", "-", "-", "-",
				r.origin.c_str(), r.note.c_str());
			out << buf;
			continue;
		}
		const auto& s = *r.scheme;
		std::snprintf(buf, sizeof buf, "%-12s %3d %3zu  %-20s %-16s %-22s %s\n", r.name.c_str(), s.order(), s.stages(),
			std::string(to_string(s.scheme_class())).c_str(), s.parabolic_stable() ? "true" : "false",
			s.schrodinger_positive_a() ? "true" : "false", r.origin.c_str());
		out << buf;
	}
}

struct CheckResult
{
	std::string name;
	bool passed = false;
	std::string detail;
};

/// Quick invariant suite behind `scsplit check`.
inline std::vector<CheckResult> run_checks(std::uint64_t seed = 1)
{
	std::vector<CheckResult> out;
	const auto add = [&](std::string name, bool ok, std::string detail) { out.push_back({std::move(name), ok, std::move(detail)}); };

	double worst = 0.0;
	for(const auto& n : builtin_names())
	{
		const auto s = builtin(n);
		cplx sa = 0;
		cplx sb = 0;
		for(std::size_t j = 0; j < s.stages(); ++j)
		{
			sa += s.a()[j];
			sb += s.b()[j];
		}
		worst = std::max({worst, std::abs(sa - 1.0), std::abs(sb - 1.0)});
	}
	add("scheme consistency", worst < 1e-12, "max |sum - 1| = " + detail::summary_value(worst));

	const bool classes = builtin("strang").scheme_class() == SchemeClass::Symmetric &&
		builtin("sc-3-3").scheme_class() == SchemeClass::SymmetricConjugate &&
		builtin("lie-trotter").scheme_class() == SchemeClass::Neither && !builtin("yoshida-4").parabolic_stable() &&
		builtin("sc-4-4").parabolic_stable();
	add("scheme classes and stability flags", classes, "");

	const auto grid = make_grid(10.0, 1, 64);
	std::mt19937_64 rng(seed);
	std::normal_distribution<double> nd;
	Field u(grid);
	for(auto& v : u.values())
	{
		v = {nd(rng), nd(rng)};
	}
	const double rt = relative_distance(u.spectral().nodal(), u);
	add("transform roundtrip", rt <= 1e-13, "relative error " + detail::summary_value(rt));

	const DenseModel model(random_symmetric(12, rng), random_symmetric(12, rng));
	const double defect = selfadjointness_defect(scheme_propagator(model, builtin("sc-4-4"), 0.1));
	add("sc-4-4 propagator self-adjoint", defect <= 1e-12, "defect " + detail::summary_value(defect));

	const auto g100 = make_grid(10.0, 1, 100);
	const ProblemSpec spec(g100, 1.0, -1.0, sample_potential(*g100, "quadratic"));
	const Field u0 = sample_gaussian(g100, 1.0, 0.5);
	const auto rep = global_error_study(builtin("strang"), spec, u0, 1.0, {0.1, 0.05, 0.025}, [&](double t) { return exact_gaussian_oracle(t, g100); });
	add("strang global order", std::abs(rep.eoc.back() - 2.0) < 0.3, "eoc " + detail::summary_value(rep.eoc.back()));

	AdaptiveOptions opt;
	opt.tolerance = 1e-6;
	const auto [ua, trace] = adaptive_propagate(builtin("sc-3-3"), spec, u0, 0.0, 1.0, opt);
	const auto acc = trace.accepted_count();
	add("sc-3-3 adaptive step count", acc >= 24 && acc <= 94, std::to_string(acc) + " accepted steps");
	return out;
}

} // namespace scsplit
