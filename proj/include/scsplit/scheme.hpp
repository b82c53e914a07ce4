#pragma once

#include "error.hpp"
#include "keyvalue.hpp"
#include "numeric.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scsplit
{

enum class SchemeClass
{
	Symmetric,
	SymmetricConjugate,
	Neither
};

inline std::string_view to_string(SchemeClass c)
{
	switch(c)
	{
	case SchemeClass::Symmetric: return "symmetric";
	case SchemeClass::SymmetricConjugate: return "symmetric-conjugate";
	case SchemeClass::Neither: return "neither";
	}
	return "neither";
}

inline SchemeClass parse_scheme_class(std::string_view s)
{
	if(s == "symmetric")
	{
		return SchemeClass::Symmetric;
	}
	if(s == "symmetric-conjugate")
	{
		return SchemeClass::SymmetricConjugate;
	}
	if(s == "neither")
	{
		return SchemeClass::Neither;
	}
	throw ParseError("unknown scheme class '" + std::string(s) + "'");
}

enum class FlowKind
{
	A,
	B
};

/// One sub-flow exp(c h A) or exp(c h B).
struct Flow
{
	FlowKind kind;
	cplx coeff;
};

inline constexpr double classify_tolerance = 1e-13;
inline constexpr double builtin_consistency_tolerance = 1e-12;
inline constexpr double file_consistency_tolerance = 1e-10;

/// Composition weights alpha_1..alpha_k of a jump composition; alpha_1 acts first.
class CompositionCoefficients
{
public:
	explicit CompositionCoefficients(std::vector<cplx> alphas) : alphas_(std::move(alphas))
	{
		if(alphas_.empty())
		{
			throw ValidationError("composition needs at least one coefficient");
		}
		cplx sum = 0;
		for(auto a : alphas_)
		{
			sum += a;
		}
		if(std::abs(sum - 1.0) > 1e-13)
		{
			throw ConsistencyError("composition coefficients sum to " + format_complex(sum) + ", not 1");
		}
	}

	[[nodiscard]] const std::vector<cplx>& alphas() const { return alphas_; }
	[[nodiscard]] std::size_t size() const { return alphas_.size(); }

private:
	std::vector<cplx> alphas_;
};

/// A splitting step B(b_s h) A(a_s h) ... B(b_1 h) A(a_1 h). Index 0 of a()
/// and b() acts first. Zero coefficients are pruned and neighbouring flows of
/// the same kind merged at construction, so a() and b() are a canonical
/// re-pairing of flows() with a_1 possibly zero.
class SplittingScheme
{
public:
	static SplittingScheme from_pairs(std::string name, int order, const std::vector<cplx>& a, const std::vector<cplx>& b,
		double tolerance = builtin_consistency_tolerance)
	{
		if(a.size() != b.size() || a.empty())
		{
			throw ValidationError("scheme '" + name + "': a and b need the same nonzero length");
		}
		std::vector<Flow> flows;
		flows.reserve(2 * a.size());
		for(std::size_t j = 0; j < a.size(); ++j)
		{
			flows.push_back({FlowKind::A, a[j]});
			flows.push_back({FlowKind::B, b[j]});
		}
		return from_flows(std::move(name), order, std::move(flows), tolerance);
	}

	static SplittingScheme from_flows(std::string name, int order, std::vector<Flow> raw,
		double tolerance = builtin_consistency_tolerance)
	{
		if(order < 1)
		{
			throw ValidationError("scheme '" + name + "': order must be positive");
		}
		SplittingScheme s;
		s.name_ = std::move(name);
		s.order_ = order;
		for(const auto& f : raw)
		{
			if(!is_finite(f.coeff))
			{
				throw ValidationError("scheme '" + s.name_ + "': non-finite coefficient");
			}
			if(f.coeff == 0.0)
			{
				continue;
			}
			if(!s.flows_.empty() && s.flows_.back().kind == f.kind)
			{
				s.flows_.back().coeff += f.coeff;
				if(s.flows_.back().coeff == 0.0)
				{
					s.flows_.pop_back();
				}
				continue;
			}
			s.flows_.push_back(f);
		}
		cplx sa = 0;
		cplx sb = 0;
		for(const auto& f : s.flows_)
		{
			(f.kind == FlowKind::A ? sa : sb) += f.coeff;
			if(f.kind == FlowKind::A)
			{
				s.a_.push_back(f.coeff);
				s.b_.push_back(0.0);
			}
			else
			{
				if(s.a_.empty() || s.b_.back() != 0.0)
				{
					s.a_.push_back(0.0);
					s.b_.push_back(f.coeff);
				}
				else
				{
					s.b_.back() = f.coeff;
				}
			}
		}
		if(std::abs(sa - 1.0) > tolerance || std::abs(sb - 1.0) > tolerance)
		{
			throw ConsistencyError("scheme '" + s.name_ + "' is inconsistent: sum a = " + format_complex(sa) +
				", sum b = " + format_complex(sb));
		}
		s.classify_flows();
		return s;
	}

	[[nodiscard]] const std::string& name() const { return name_; }
	[[nodiscard]] int order() const { return order_; }
	[[nodiscard]] std::size_t stages() const { return a_.size(); }
	[[nodiscard]] const std::vector<cplx>& a() const { return a_; }
	[[nodiscard]] const std::vector<cplx>& b() const { return b_; }
	[[nodiscard]] const std::vector<Flow>& flows() const { return flows_; }
	[[nodiscard]] SchemeClass scheme_class() const { return class_; }
	/// Coefficients also satisfy the conjugate-palindrome relations
	/// (always true for SymmetricConjugate, true for real Symmetric schemes).
	[[nodiscard]] bool conjugate_compatible() const { return conjugate_compatible_; }
	[[nodiscard]] bool parabolic_stable() const { return parabolic_stable_; }
	[[nodiscard]] bool schrodinger_positive_a() const { return schrodinger_positive_a_; }
	[[nodiscard]] bool is_real() const
	{
		return std::all_of(flows_.begin(), flows_.end(), [](const Flow& f) { return f.coeff.imag() == 0.0; });
	}
	[[nodiscard]] double min_real_a() const
	{
		double m = std::numeric_limits<double>::infinity();
		for(auto v : a_)
		{
			m = std::min(m, v.real());
		}
		return m;
	}
	[[nodiscard]] double min_real_b() const
	{
		double m = std::numeric_limits<double>::infinity();
		for(auto v : b_)
		{
			m = std::min(m, v.real());
		}
		return m;
	}

	[[nodiscard]] const std::string& source() const { return source_; }
	SplittingScheme& set_source(std::string s)
	{
		source_ = std::move(s);
		return *this;
	}
	SplittingScheme& set_name(std::string s)
	{
		name_ = std::move(s);
		return *this;
	}

private:
	SplittingScheme() = default;

	void classify_flows()
	{
		const std::size_t n = flows_.size();
		bool sym = true;
		bool conj = true;
		for(std::size_t k = 0; k < n; ++k)
		{
			const auto& f = flows_[k];
			const auto& g = flows_[n - 1 - k];
			if(f.kind != g.kind)
			{
				sym = conj = false;
				break;
			}
			sym = sym && std::abs(f.coeff - g.coeff) <= classify_tolerance;
			conj = conj && std::abs(f.coeff - std::conj(g.coeff)) <= classify_tolerance;
		}
		class_ = sym ? SchemeClass::Symmetric : conj ? SchemeClass::SymmetricConjugate : SchemeClass::Neither;
		conjugate_compatible_ = conj;
		parabolic_stable_ = min_real_a() >= 0.0;
		schrodinger_positive_a_ = std::all_of(a_.begin(), a_.end(), [](cplx v) { return v.imag() == 0.0 && v.real() >= 0.0; });
	}

	std::string name_;
	std::string source_ = "builtin";
	int order_ = 1;
	std::vector<cplx> a_;
	std::vector<cplx> b_;
	std::vector<Flow> flows_;
	SchemeClass class_ = SchemeClass::Neither;
	bool conjugate_compatible_ = false;
	bool parabolic_stable_ = false;
	bool schrodinger_positive_a_ = false;
};

inline SchemeClass classify(const SplittingScheme& s)
{
	return s.scheme_class();
}

/// |sum alpha_j^power|; power 5 is the leading error constant of a triple jump of an order-4 method.
inline double composition_error_constant(const CompositionCoefficients& c, int power = 5)
{
	cplx sum = 0;
	for(auto a : c.alphas())
	{
		sum += std::pow(a, power);
	}
	return std::abs(sum);
}

namespace detail
{

inline std::vector<Flow> scaled_flows(const SplittingScheme& s, cplx factor, bool conjugate = false)
{
	std::vector<Flow> out = s.flows();
	for(auto& f : out)
	{
		f.coeff = (conjugate ? std::conj(f.coeff) : f.coeff) * factor;
	}
	return out;
}

inline bool raises_order(const SplittingScheme& base, const std::vector<cplx>& alphas)
{
	if(base.scheme_class() == SchemeClass::Neither)
	{
		return false;
	}
	cplx sum = 0;
	for(auto a : alphas)
	{
		sum += std::pow(a, base.order() + 1);
	}
	return std::abs(sum) < 1e-12;
}

} // namespace detail

/// S_{alpha_k h} o ... o S_{alpha_1 h}; alpha_1 acts first.
inline SplittingScheme compose(const SplittingScheme& base, const CompositionCoefficients& c, std::string name, int order)
{
	std::vector<Flow> flows;
	for(auto alpha : c.alphas())
	{
		auto part = detail::scaled_flows(base, alpha);
		flows.insert(flows.end(), part.begin(), part.end());
	}
	return SplittingScheme::from_flows(std::move(name), order, std::move(flows));
}

inline SplittingScheme triple_jump(const SplittingScheme& base, const CompositionCoefficients& c, std::string name = {})
{
	if(c.size() != 3)
	{
		throw ValidationError("triple jump needs exactly three coefficients");
	}
	const int order = base.order() + (detail::raises_order(base, c.alphas()) ? 2 : 0);
	if(name.empty())
	{
		name = base.name() + "-triple-jump";
	}
	return compose(base, c, std::move(name), order);
}

/// S_{conj(alpha) h} o S_{alpha h}. alpha is first rescaled by 1/(2 Re alpha)
/// so that the two sub-steps add up to one full step.
inline SplittingScheme double_jump_conjugate(const SplittingScheme& base, cplx alpha, std::string name = {})
{
	if(!(alpha.real() > 0.0))
	{
		throw StabilityError("double jump needs Re(alpha) > 0, got " + format_complex(alpha));
	}
	alpha /= 2.0 * alpha.real();
	const int p = base.order();
	const bool raised = base.scheme_class() != SchemeClass::Neither &&
		std::abs(std::pow(alpha, p + 1) + std::pow(std::conj(alpha), p + 1)) < 1e-12;
	if(name.empty())
	{
		name = base.name() + "-double-jump";
	}
	return compose(base, CompositionCoefficients({alpha, std::conj(alpha)}), std::move(name), p + (raised ? 1 : 0));
}

namespace detail
{

inline SplittingScheme lie_trotter()
{
	return SplittingScheme::from_pairs("lie-trotter", 1, {1.0}, {1.0});
}

inline SplittingScheme strang()
{
	return SplittingScheme::from_pairs("strang", 2, {0.0, 1.0}, {0.5, 0.5});
}

inline cplx sc3_alpha()
{
	return 0.5 * cplx(1.0, 1.0 / std::sqrt(3.0));
}

inline std::vector<cplx> yoshida_alphas()
{
	const double a1 = 1.0 / (2.0 - std::cbrt(2.0));
	return {a1, 1.0 - 2.0 * a1, a1};
}

inline std::vector<cplx> complex_symmetric4_alphas()
{
	const cplx gamma = 2.0 - std::cbrt(2.0) * std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
	const cplx a1 = 1.0 / gamma;
	return {a1, 1.0 - 2.0 * a1, a1};
}

inline std::vector<cplx> symmetric_conjugate4_alphas()
{
	const cplx a1(0.25, std::sqrt(15.0) / 12.0);
	return {a1, 0.5, std::conj(a1)};
}

} // namespace detail

/// One root of the symmetric triple-jump condition 2a^q + (1-2a)^q = 0.
struct JumpCandidate
{
	cplx alpha;
	double proxy_error;   // |2 alpha^(q+2) + (1 - 2 alpha)^(q+2)|
	double min_real_a;    // of the composed scheme
};

/// All q roots (q = base order + 1, odd) of 2a^q + (1-2a)^q = 0, i.e.
/// a = 1 / (2 - 2^(1/q) w^k) with w = exp(2 pi i / q).
inline std::vector<JumpCandidate> symmetric_triple_jump_roots(const SplittingScheme& base)
{
	const int q = base.order() + 1;
	if(q % 2 == 0)
	{
		throw ValidationError("symmetric triple jump needs an even base order");
	}
	std::vector<JumpCandidate> out;
	for(int k = 0; k < q; ++k)
	{
		const cplx w = std::polar(1.0, 2.0 * std::numbers::pi * k / q);
		const cplx a = 1.0 / (2.0 - std::pow(2.0, 1.0 / q) * w);
		const auto s = compose(base, CompositionCoefficients({a, 1.0 - 2.0 * a, a}), "candidate", q + 1);
		out.push_back({a, std::abs(2.0 * std::pow(a, q + 2) + std::pow(1.0 - 2.0 * a, q + 2)), s.min_real_a()});
	}
	return out;
}

inline SplittingScheme builtin(std::string_view name);

/// Order-6 complex symmetric scheme: triple jump (a, 1-2a, a) of cs-4-4 with
/// the root that keeps every Re(a_j) >= 0 and has the smallest proxy error;
/// ties (conjugate pairs) go to Im(a) > 0.
inline SplittingScheme derive_sixth_order_symmetric()
{
	const auto base = builtin("cs-4-4");
	std::optional<JumpCandidate> best;
	for(const auto& c : symmetric_triple_jump_roots(base))
	{
		if(c.min_real_a < 0.0)
		{
			continue;
		}
		if(!best)
		{
			best = c;
			continue;
		}
		const double scale = std::max(best->proxy_error, c.proxy_error);
		const bool tie = std::abs(c.proxy_error - best->proxy_error) <= 1e-9 * scale;
		if((!tie && c.proxy_error < best->proxy_error) || (tie && c.alpha.imag() > best->alpha.imag()))
		{
			best = c;
		}
	}
	if(!best)
	{
		throw ConstructionError("no admissible order-6 triple-jump root with nonnegative real parts");
	}
	const cplx a = best->alpha;
	return compose(base, CompositionCoefficients({a, 1.0 - 2.0 * a, a}), "cs-6", 6)
		.set_source("triple jump (a, 1-2a, a) of cs-4-4, a = " + format_complex(a));
}

/// Order-6 symmetric-conjugate scheme: the order-6 complex symmetric scheme
/// over h/2 followed by its complex conjugate over h/2.
inline SplittingScheme derive_sixth_order_sc()
{
	const auto base = derive_sixth_order_symmetric();
	auto flows = detail::scaled_flows(base, 0.5);
	const auto tail = detail::scaled_flows(base, 0.5, true);
	flows.insert(flows.end(), tail.begin(), tail.end());
	auto s = SplittingScheme::from_flows("sc-6", 6, std::move(flows));
	if(s.scheme_class() != SchemeClass::SymmetricConjugate || !s.parabolic_stable())
	{
		throw ConstructionError("conjugate pair composition did not give a stable symmetric-conjugate scheme");
	}
	s.set_source("cs-6 over h/2, then its conjugate over h/2");
	return s;
}

inline const std::vector<std::string>& builtin_names()
{
	static const std::vector<std::string> names = {
		"lie-trotter", "strang", "sc-3-3", "yoshida-4", "cs-4-4", "sc-4-4", "cs-6", "sc-6"};
	return names;
}

inline std::string canonical_scheme_name(std::string_view name)
{
	static const std::array<std::pair<std::string_view, std::string_view>, 4> aliases = {{
		{"sc-3", "sc-3-3"}, {"sc-4", "sc-4-4"}, {"cs-4", "cs-4-4"}, {"yoshida", "yoshida-4"}}};
	for(const auto& [alias, target] : aliases)
	{
		if(name == alias)
		{
			return std::string(target);
		}
	}
	return std::string(name);
}

inline SplittingScheme builtin(std::string_view requested)
{
	const std::string name = canonical_scheme_name(requested);
	if(name == "lie-trotter")
	{
		return detail::lie_trotter();
	}
	if(name == "strang")
	{
		return detail::strang();
	}
	if(name == "sc-3-3")
	{
		return double_jump_conjugate(detail::strang(), detail::sc3_alpha(), "sc-3-3");
	}
	if(name == "yoshida-4")
	{
		return triple_jump(detail::strang(), CompositionCoefficients(detail::yoshida_alphas()), "yoshida-4");
	}
	if(name == "cs-4-4")
	{
		return triple_jump(detail::strang(), CompositionCoefficients(detail::complex_symmetric4_alphas()), "cs-4-4");
	}
	if(name == "sc-4-4")
	{
		return triple_jump(detail::strang(), CompositionCoefficients(detail::symmetric_conjugate4_alphas()), "sc-4-4");
	}
	if(name == "cs-6")
	{
		return derive_sixth_order_symmetric();
	}
	if(name == "sc-6")
	{
		return derive_sixth_order_sc();
	}
	std::string msg = "unknown scheme '" + std::string(requested) + "'; valid names:";
	for(const auto& n : builtin_names())
	{
		msg += " " + n;
	}
	throw ValidationError(msg);
}

inline CompositionCoefficients yoshida_coefficients()
{
	return CompositionCoefficients(detail::yoshida_alphas());
}

inline CompositionCoefficients complex_symmetric4_coefficients()
{
	return CompositionCoefficients(detail::complex_symmetric4_alphas());
}

inline CompositionCoefficients symmetric_conjugate4_coefficients()
{
	return CompositionCoefficients(detail::symmetric_conjugate4_alphas());
}

/// Text form: header keys, then one `Re(a) Im(a) Re(b) Im(b)` row per stage.
inline std::string write_scheme(const SplittingScheme& s)
{
	std::string out;
	out += "name=" + s.name() + "\n";
	out += "order=" + std::to_string(s.order()) + "\n";
	out += "class=" + std::string(to_string(s.scheme_class())) + "\n";
	out += "source=" + s.source() + "\n";
	out += "# Re(a_j) Im(a_j) Re(b_j) Im(b_j), first row acts first\n";
	for(std::size_t j = 0; j < s.stages(); ++j)
	{
		out += format_real(s.a()[j].real()) + " " + format_real(s.a()[j].imag()) + " " +
			format_real(s.b()[j].real()) + " " + format_real(s.b()[j].imag()) + "\n";
	}
	return out;
}

inline void save_scheme(const SplittingScheme& s, const std::filesystem::path& path)
{
	std::ofstream out(path);
	if(!out)
	{
		throw ValidationError("cannot write '" + path.string() + "'");
	}
	out << write_scheme(s);
}

/// Parses the text form. Class and consistency are recomputed; a declared
/// class that the coefficients do not satisfy is rejected.
inline SplittingScheme parse_scheme(std::string_view text, const std::string& origin = "<text>")
{
	const auto doc = KeyValueDocument::parse(text);
	const auto name = doc.require("", "name");
	int order = 0;
	{
		const auto o = doc.require("", "order");
		const double v = parse_real(o);
		if(v != std::floor(v) || v < 1)
		{
			throw ParseError(origin + ": order must be a positive integer, got '" + o + "'");
		}
		order = static_cast<int>(v);
	}
	if(doc.get("", "status") == std::optional<std::string>("placeholder"))
	{
		throw ValidationError(origin + ": '" + name + "' is a placeholder without coefficient data");
	}
	std::vector<cplx> a;
	std::vector<cplx> b;
	for(const auto& row : doc.data_lines())
	{
		std::istringstream in(row.text);
		std::vector<double> fields;
		std::string tok;
		while(in >> tok)
		{
			fields.push_back(parse_real(tok));
		}
		if(fields.size() != 4)
		{
			throw ParseError(origin + " line " + std::to_string(row.line) + ": expected 4 fields, got " +
				std::to_string(fields.size()));
		}
		a.emplace_back(fields[0], fields[1]);
		b.emplace_back(fields[2], fields[3]);
	}
	if(a.empty())
	{
		throw ParseError(origin + ": no coefficient rows");
	}
	auto s = SplittingScheme::from_pairs(name, order, a, b, file_consistency_tolerance);
	if(const auto declared = doc.get("", "class"))
	{
		const auto want = parse_scheme_class(*declared);
		const bool ok = want == s.scheme_class() ||
			(want == SchemeClass::SymmetricConjugate && s.conjugate_compatible());
		if(!ok)
		{
			throw ValidationError(origin + ": declared class " + *declared + " but coefficients are " +
				std::string(to_string(s.scheme_class())));
		}
	}
	s.set_source(doc.get("", "source").value_or(origin));
	return s;
}

inline SplittingScheme load_scheme(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if(!in)
	{
		throw ValidationError("cannot open scheme file '" + path.string() + "'");
	}
	std::stringstream buf;
	buf << in.rdbuf();
	return parse_scheme(buf.str(), path.string());
}

/// Builtin name, or a path to a scheme file.
inline SplittingScheme resolve_scheme(std::string_view ref)
{
	const std::string name = canonical_scheme_name(ref);
	const auto& names = builtin_names();
	if(std::find(names.begin(), names.end(), name) != names.end())
	{
		return builtin(name);
	}
	if(std::filesystem::exists(std::filesystem::path(std::string(ref))))
	{
		return load_scheme(std::string(ref));
	}
	return builtin(ref);
}

} // namespace scsplit
