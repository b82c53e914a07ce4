#pragma once

#include "error.hpp"
#include "field.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "scheme.hpp"
#include "spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace scsplit
{

struct StepOptions
{
	/// Permit schemes with some Re(a_j) < 0 on parabolic problems.
	bool allow_unstable = false;
};

inline void check_stability_guard(const SplittingScheme& scheme, const ProblemSpec& spec, bool allow_unstable)
{
	if(!allow_unstable && !scheme.parabolic_stable() && spec.is_parabolic())
	{
		throw StabilityError("scheme '" + scheme.name() + "' has min Re(a_j) = " + format_real(scheme.min_real_a()) +
			" < 0 and the problem is parabolic; pass the allow-unstable override to run it anyway");
	}
}

/// One splitting step with a fixed (scheme, problem, h), multipliers cached.
class StepPlan
{
public:
	StepPlan(const SplittingScheme& scheme, const ProblemSpec& spec, double h, StepOptions options = {})
		: grid_(spec.grid_ptr()), h_(h)
	{
		if(!(h > 0.0) || !std::isfinite(h))
		{
			throw ValidationError("step size must be positive and finite");
		}
		check_stability_guard(scheme, spec, options.allow_unstable);
		std::size_t pair = 0;
		for(const auto& f : scheme.flows())
		{
			if(f.kind == FlowKind::A || pair == 0)
			{
				++pair;
			}
			Stage st;
			st.kind = f.kind;
			st.pair = pair;
			st.multipliers = f.kind == FlowKind::A ? flow_A_multipliers(spec, f.coeff, h) : flow_B_multipliers(spec, f.coeff, h);
			st.real = std::all_of(st.multipliers.begin(), st.multipliers.end(), [](cplx m) { return m.imag() == 0.0; });
			stages_.push_back(std::move(st));
		}
	}

	[[nodiscard]] double h() const { return h_; }

	/// In place; the state comes back nodal. A real state under real
	/// multipliers stays exactly real (transform roundoff in Im is dropped).
	void apply(Field& state) const
	{
		if(!state.grid().same_shape(*grid_))
		{
			throw ValidationError("state and problem live on different grids");
		}
		bool real = state.representation() == Representation::Nodal && is_real_nodal(state);
		const auto to_nodal = [&] {
			if(state.representation() == Representation::Spectral)
			{
				state.to_nodal();
				if(real)
				{
					for(auto& v : state.values())
					{
						v = v.real();
					}
				}
			}
		};
		for(const auto& st : stages_)
		{
			if(st.kind == FlowKind::A)
			{
				state.to_spectral();
			}
			else
			{
				to_nodal();
			}
			real = real && st.real;
			auto v = state.values();
			bool finite = true;
			for(std::size_t k = 0; k < v.size(); ++k)
			{
				v[k] *= st.multipliers[k];
				finite = finite && is_finite(v[k]);
			}
			if(!finite)
			{
				throw InstabilityError("non-finite values after the " + std::string(st.kind == FlowKind::A ? "A" : "B") +
					" flow of stage " + std::to_string(st.pair), st.pair);
			}
		}
		to_nodal();
		if(!state.all_finite())
		{
			throw InstabilityError("non-finite values after the final transform", stages_.empty() ? 0 : stages_.back().pair);
		}
	}

private:
	struct Stage
	{
		FlowKind kind;
		std::size_t pair;
		std::vector<cplx> multipliers;
		bool real = false;
	};

	static bool is_real_nodal(const Field& f)
	{
		const auto v = f.values();
		return std::all_of(v.begin(), v.end(), [](cplx z) { return z.imag() == 0.0; });
	}

	GridPtr grid_;
	double h_;
	std::vector<Stage> stages_;
};

inline Field step(const SplittingScheme& scheme, const ProblemSpec& spec, const Field& state, double h, StepOptions options = {})
{
	Field out = state;
	StepPlan(scheme, spec, h, options).apply(out);
	return out;
}

struct StepRecord
{
	double t = 0.0;
	double h = 0.0;
	double imag_estimate_2 = 0.0;
	double imag_estimate_inf = 0.0;
	bool accepted = true;
	std::optional<double> true_local_error;
};

struct StepTrace
{
	std::vector<StepRecord> records;

	[[nodiscard]] std::size_t accepted_count() const
	{
		return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const StepRecord& r) { return r.accepted; }));
	}

	[[nodiscard]] std::size_t rejected_count() const { return records.size() - accepted_count(); }

	/// `n,t,h,est2,estinf,accepted`, plus `true_local_err` when any record has one.
	void write_csv(std::ostream& out) const
	{
		const bool with_local = std::any_of(records.begin(), records.end(), [](const StepRecord& r) { return r.true_local_error.has_value(); });
		out << "n,t,h,est2,estinf,accepted" << (with_local ? ",true_local_err" : "") << "\n";
		for(std::size_t n = 0; n < records.size(); ++n)
		{
			const auto& r = records[n];
			out << n + 1 << "," << format_real(r.t) << "," << format_real(r.h) << "," << format_real(r.imag_estimate_2) << ","
				<< format_real(r.imag_estimate_inf) << "," << (r.accepted ? 1 : 0);
			if(with_local)
			{
				out << "," << (r.true_local_error ? format_real(*r.true_local_error) : std::string("nan"));
			}
			out << "\n";
		}
	}
};

/// ||Im u||_2 / ||u||_2
inline double relative_imag_2(const Field& u)
{
	const double n = u.norm();
	return n > 0.0 ? u.imag_norm() / n : 0.0;
}

/// ||Im u||_inf / ||u||_inf
inline double relative_imag_inf(const Field& u)
{
	const double n = u.max_norm();
	return n > 0.0 ? u.imag_max_norm() / n : 0.0;
}

struct PropagateOptions
{
	bool allow_unstable = false;
	double t0 = 0.0;
};

inline std::pair<Field, StepTrace> propagate(const SplittingScheme& scheme, const ProblemSpec& spec, const Field& state,
	double h, std::size_t steps, PropagateOptions options = {})
{
	if(steps < 1)
	{
		throw ValidationError("propagate needs at least one step");
	}
	const StepPlan plan(scheme, spec, h, {options.allow_unstable});
	Field u = state.nodal();
	StepTrace trace;
	trace.records.reserve(steps);
	for(std::size_t n = 1; n <= steps; ++n)
	{
		plan.apply(u);
		trace.records.push_back({options.t0 + static_cast<double>(n) * h, h, relative_imag_2(u), relative_imag_inf(u), true, std::nullopt});
	}
	return {std::move(u), std::move(trace)};
}

/// Errors and fitted orders over a list of step sizes.
struct ConvergenceReport
{
	std::string scheme;
	int order = 0;
	bool local = false;              // single-step errors instead of errors at T
	std::vector<double> stepsizes;
	std::vector<double> global_errors; // ||u - u_ref|| / ||u_ref||
	std::vector<double> imag_errors;   // ||Im u|| / ||u||
	std::vector<bool> unstable;
	std::vector<double> eoc;           // pairwise, length stepsizes.size() - 1
	std::vector<double> imag_eoc;
	/// Once an error drops below this the run has reached roundoff; that entry
	/// and all smaller step sizes stay out of every slope.
	double error_floor = 1e-13;

	void fit()
	{
		eoc.clear();
		imag_eoc.clear();
		for(std::size_t i = 0; i + 1 < stepsizes.size(); ++i)
		{
			eoc.push_back(pair_slope(global_errors, i));
			imag_eoc.push_back(pair_slope(imag_errors, i));
		}
	}

	/// Least-squares slope of log(err) against log(h) over stable entries.
	[[nodiscard]] double fitted_slope() const { return ls_slope(global_errors); }
	[[nodiscard]] double fitted_imag_slope() const { return ls_slope(imag_errors); }

	/// `h,global_err,imag_err,eoc_pair,unstable`; eoc_pair on row i uses rows i-1 and i.
	void write_csv(std::ostream& out) const
	{
		out << "h,global_err,imag_err,eoc_pair,unstable\n";
		for(std::size_t i = 0; i < stepsizes.size(); ++i)
		{
			out << format_real(stepsizes[i]) << "," << format_real(global_errors[i]) << "," << format_real(imag_errors[i]) << ","
				<< (i == 0 ? std::string("nan") : format_real(eoc[i - 1])) << "," << (unstable[i] ? 1 : 0) << "\n";
		}
	}

private:
	[[nodiscard]] bool usable(const std::vector<double>& e, std::size_t i) const
	{
		if(unstable[i] || !std::isfinite(e[i]))
		{
			return false;
		}
		for(std::size_t j = 0; j <= i; ++j)
		{
			if(e[j] < error_floor)
			{
				return false;
			}
		}
		return true;
	}

	[[nodiscard]] double pair_slope(const std::vector<double>& e, std::size_t i) const
	{
		if(!usable(e, i) || !usable(e, i + 1))
		{
			return std::numeric_limits<double>::quiet_NaN();
		}
		return std::log(e[i] / e[i + 1]) / std::log(stepsizes[i] / stepsizes[i + 1]);
	}

	[[nodiscard]] double ls_slope(const std::vector<double>& e) const
	{
		double sx = 0, sy = 0, sxx = 0, sxy = 0;
		int n = 0;
		for(std::size_t i = 0; i < stepsizes.size(); ++i)
		{
			if(!usable(e, i))
			{
				continue;
			}
			const double x = std::log(stepsizes[i]);
			const double y = std::log(e[i]);
			sx += x;
			sy += y;
			sxx += x * x;
			sxy += x * y;
			++n;
		}
		if(n < 2)
		{
			return std::numeric_limits<double>::quiet_NaN();
		}
		return (n * sxy - sx * sy) / (n * sxx - sx * sx);
	}
};

using ReferenceFn = std::function<Field(double)>;

struct StudyOptions
{
	double t0 = 0.0;
	bool allow_unstable = false;
	unsigned threads = 1;
	/// A run counts as unstable when ||u|| exceeds this multiple of ||u_ref||.
	double blowup_ratio = 10.0;
	/// Accuracy of the reference; see ConvergenceReport::error_floor.
	double error_floor = 1e-13;
};

namespace detail
{

inline void require_decreasing(const std::vector<double>& h_list)
{
	if(h_list.size() < 2)
	{
		throw ValidationError("a convergence study needs at least two step sizes");
	}
	for(std::size_t i = 0; i + 1 < h_list.size(); ++i)
	{
		if(!(h_list[i + 1] < h_list[i]))
		{
			throw ValidationError("step sizes must be strictly decreasing");
		}
	}
}

} // namespace detail

inline ConvergenceReport global_error_study(const SplittingScheme& scheme, const ProblemSpec& spec, const Field& initial,
	double T, const std::vector<double>& h_list, const ReferenceFn& reference, StudyOptions options = {})
{
	check_stability_guard(scheme, spec, options.allow_unstable);
	detail::require_decreasing(h_list);
	const double span = T - options.t0;
	std::vector<std::size_t> steps(h_list.size());
	for(std::size_t i = 0; i < h_list.size(); ++i)
	{
		const double n = std::round(span / h_list[i]);
		if(!(h_list[i] > 0.0) || n < 1 || std::abs(n * h_list[i] - span) > 1e-9 * span)
		{
			throw ValidationError("step size " + format_real(h_list[i]) + " does not divide the interval length " + format_real(span));
		}
		steps[i] = static_cast<std::size_t>(n);
	}
	const Field ref = reference(T).nodal();
	const double ref_norm = ref.norm();
	ConvergenceReport r;
	r.scheme = scheme.name();
	r.order = scheme.order();
	r.stepsizes = h_list;
	r.error_floor = options.error_floor;
	r.global_errors.assign(h_list.size(), std::numeric_limits<double>::infinity());
	r.imag_errors.assign(h_list.size(), std::numeric_limits<double>::infinity());
	std::vector<char> unstable(h_list.size(), 1);
	parallel_for(h_list.size(), options.threads, [&](std::size_t i) {
		try
		{
			const auto [u, trace] = propagate(scheme, spec, initial, span / static_cast<double>(steps[i]), steps[i],
				{options.allow_unstable, options.t0});
			r.global_errors[i] = (u - ref).norm() / ref_norm;
			r.imag_errors[i] = relative_imag_2(u);
			unstable[i] = !(u.all_finite() && u.norm() <= options.blowup_ratio * ref_norm);
		}
		catch(const NumericalError&)
		{
			unstable[i] = 1;
		}
	});
	r.unstable.assign(unstable.begin(), unstable.end());
	r.fit();
	return r;
}

inline ConvergenceReport global_error_study(const SplittingScheme& scheme, const ProblemSpec& spec, const Field& initial,
	double T, const std::vector<double>& h_list, const Field& reference, StudyOptions options = {})
{
	return global_error_study(scheme, spec, initial, T, h_list, [&](double) { return reference; }, options);
}

/// One step of each size from the same initial state at t0.
inline ConvergenceReport local_error_study(const SplittingScheme& scheme, const ProblemSpec& spec, const Field& initial,
	const std::vector<double>& h_list, const ReferenceFn& reference, StudyOptions options = {})
{
	check_stability_guard(scheme, spec, options.allow_unstable);
	detail::require_decreasing(h_list);
	ConvergenceReport r;
	r.scheme = scheme.name();
	r.order = scheme.order();
	r.local = true;
	r.stepsizes = h_list;
	r.error_floor = options.error_floor;
	r.global_errors.assign(h_list.size(), std::numeric_limits<double>::infinity());
	r.imag_errors.assign(h_list.size(), std::numeric_limits<double>::infinity());
	std::vector<char> unstable(h_list.size(), 1);
	parallel_for(h_list.size(), options.threads, [&](std::size_t i) {
		const Field ref = reference(options.t0 + h_list[i]).nodal();
		try
		{
			const Field u = step(scheme, spec, initial, h_list[i], {options.allow_unstable});
			r.global_errors[i] = (u - ref).norm() / ref.norm();
			r.imag_errors[i] = relative_imag_2(u);
			unstable[i] = !(u.all_finite() && u.norm() <= options.blowup_ratio * ref.norm());
		}
		catch(const NumericalError&)
		{
			unstable[i] = 1;
		}
	});
	r.unstable.assign(unstable.begin(), unstable.end());
	r.fit();
	return r;
}

enum class NormKind
{
	Euclidean,
	Maximum
};

struct AdaptiveOptions
{
	double tolerance = 1e-6;
	NormKind norm = NormKind::Euclidean;
	std::optional<double> h0; // default (T - t0)/10
	double safety = 1.0;
	double min_factor = 0.2;
	double max_factor = 5.0;
	bool relative = false;     // divide the estimate by ||u||_q
	bool project_real = false; // drop Im(u) after accepted steps
	ReferenceFn exact;         // when set, accepted records carry the true local error
	std::size_t max_trials = 10'000'000;
};

/// Controller failure together with the trace up to that point.
class AdaptiveFailure : public ControllerError
{
public:
	AdaptiveFailure(const std::string& what, StepTrace trace) : ControllerError(what), trace_(std::move(trace)) {}
	[[nodiscard]] const StepTrace& trace() const { return trace_; }

private:
	StepTrace trace_;
};

/// Step size control from the imaginary part of the numerical solution of a
/// real problem. est = ||Im u||_q after a trial step (optionally relative);
/// accept when est <= tol; next step tau (tol/est)^(1/(p+1)) times safety,
/// clamped to [min_factor, max_factor] tau.
inline std::pair<Field, StepTrace> adaptive_propagate(const SplittingScheme& scheme, const ProblemSpec& spec, const Field& state,
	double t0, double T, const AdaptiveOptions& options)
{
	if(scheme.scheme_class() != SchemeClass::SymmetricConjugate)
	{
		throw ValidationError("adaptive stepping needs a symmetric-conjugate scheme; '" + scheme.name() + "' is " +
			std::string(to_string(scheme.scheme_class())));
	}
	if(!spec.is_real())
	{
		throw ValidationError("adaptive stepping needs real alpha and beta");
	}
	const Field u0 = state.nodal();
	for(std::size_t k = 0; k < u0.size(); ++k)
	{
		if(u0[k].imag() != 0.0)
		{
			throw ValidationError("adaptive stepping needs a real initial state");
		}
	}
	if(!(T > t0) || !(options.tolerance > 0.0))
	{
		throw ValidationError("adaptive stepping needs T > t0 and a positive tolerance");
	}
	check_stability_guard(scheme, spec, false);
	const double span = T - t0;
	const double h_min = 1e-12 * span;
	const double expo = 1.0 / (scheme.order() + 1);
	double tau = options.h0.value_or(span / 10.0);
	if(!(tau > 0.0))
	{
		throw ValidationError("initial step size must be positive");
	}

	const auto estimate = [&](const Field& v) {
		const double e = options.norm == NormKind::Euclidean ? v.imag_norm() : v.imag_max_norm();
		if(!options.relative)
		{
			return e;
		}
		const double n = options.norm == NormKind::Euclidean ? v.norm() : v.max_norm();
		return n > 0.0 ? e / n : e;
	};

	Field u = u0;
	double t = t0;
	StepTrace trace;
	for(std::size_t trial = 0; t < T; ++trial)
	{
		if(trial >= options.max_trials)
		{
			throw AdaptiveFailure("adaptive stepping exceeded " + std::to_string(options.max_trials) + " trials", std::move(trace));
		}
		const bool last = tau >= T - t;
		const double h = last ? T - t : tau;
		if(h < h_min)
		{
			throw AdaptiveFailure("step size " + format_real(h) + " fell below " + format_real(h_min) + " at t = " + format_real(t),
				std::move(trace));
		}
		Field v = step(scheme, spec, u, h);
		const double est = estimate(v);
		StepRecord rec{last ? T : t + h, h, relative_imag_2(v), relative_imag_inf(v), est <= options.tolerance, std::nullopt};
		double factor = est > 0.0 ? options.safety * std::pow(options.tolerance / est, expo) : options.max_factor;
		factor = std::clamp(factor, options.min_factor, options.max_factor);
		if(rec.accepted)
		{
			if(options.exact)
			{
				const Field from = options.exact(t).nodal();
				const Field to = options.exact(rec.t).nodal();
				rec.true_local_error = (step(scheme, spec, from, h) - to).norm();
			}
			u = std::move(v);
			if(options.project_real)
			{
				u = u.real_part();
			}
			t = rec.t;
		}
		trace.records.push_back(rec);
		tau = h * factor;
	}
	return {std::move(u), std::move(trace)};
}

/// exp(t alpha Laplace) u for problems without potential.
inline Field exact_propagator_spectral(const ProblemSpec& spec, const Field& state, double t)
{
	if(!spec.potential_is_zero())
	{
		throw ValidationError("exact spectral propagator is only available for a zero potential");
	}
	if(t == 0.0)
	{
		return state;
	}
	if(t < 0.0)
	{
		throw ValidationError("exact spectral propagator needs t >= 0");
	}
	return flow_A(state, 1.0, t, spec);
}

} // namespace scsplit
