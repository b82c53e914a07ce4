#pragma once

#include "error.hpp"
#include "field.hpp"
#include "integrator.hpp"
#include "numeric.hpp"
#include "scheme.hpp"
#include "spectral.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <utility>
#include <vector>

namespace scsplit
{

struct GroundStateOptions
{
	bool allow_unstable = false;
	/// Stop early once |E_n - E_{n-window}| < energy_tolerance.
	std::optional<double> energy_tolerance;
	std::size_t window = 10;
};

struct GroundStateResult
{
	Field state; // real part of the final iterate, unit discrete L2 norm
	double energy = 0.0;
	std::vector<std::pair<double, double>> energy_history;  // (t_n, E_n), n = 0..N
	std::vector<std::pair<double, double>> relimag_history; // (t_n, ||Im u_n|| / ||u_n||)
	std::size_t steps = 0;
	bool converged_early = false;

	/// `n,t,E_n,energy_err,relimag` against a reference energy.
	void write_csv(std::ostream& out, double e0_ref) const
	{
		out << "n,t,E_n,energy_err,relimag\n";
		for(std::size_t n = 0; n < energy_history.size(); ++n)
		{
			const auto [t, e] = energy_history[n];
			out << n << "," << format_real(t) << "," << format_real(e) << "," << format_real(std::abs(e0_ref - e) / std::abs(e0_ref))
				<< "," << format_real(relimag_history[n].second) << "\n";
		}
	}
};

/// Imaginary time propagation of a real problem with renormalisation after
/// every step; the energy uses Re(u_n) only.
inline GroundStateResult imaginary_time_groundstate(const SplittingScheme& scheme, const ProblemSpec& spec, const Field& initial,
	double h, double T, GroundStateOptions options = {})
{
	if(!spec.is_real())
	{
		throw ValidationError("ground state computation needs real alpha and beta");
	}
	const double n_real = std::round(T / h);
	if(!(h > 0.0) || n_real < 1 || std::abs(n_real * h - T) > 1e-9 * T)
	{
		throw ValidationError("step size " + format_real(h) + " does not divide T = " + format_real(T));
	}
	const auto steps = static_cast<std::size_t>(n_real);
	const StepPlan plan(scheme, spec, h, {options.allow_unstable});
	Field u = initial.nodal();
	const double n0 = u.l2_norm();
	if(!(n0 > 0.0))
	{
		throw ValidationError("initial state is zero");
	}
	u *= 1.0 / n0;
	GroundStateResult r{u.real_part(), 0.0, {}, {}, 0, false};
	const auto record = [&](double t) {
		const double e = rayleigh_quotient(u.real_part(), spec).real();
		r.energy_history.emplace_back(t, e);
		r.relimag_history.emplace_back(t, relative_imag_2(u));
		return e;
	};
	r.energy = record(0.0);
	for(std::size_t n = 1; n <= steps; ++n)
	{
		plan.apply(u);
		const double norm = u.l2_norm();
		if(!std::isfinite(norm) || norm == 0.0)
		{
			throw InstabilityError("state norm became " + format_real(norm) + " at step " + std::to_string(n), 0);
		}
		u *= 1.0 / norm;
		r.energy = record(static_cast<double>(n) * h);
		r.steps = n;
		if(options.energy_tolerance && n >= options.window &&
			std::abs(r.energy - r.energy_history[n - options.window].second) < *options.energy_tolerance)
		{
			r.converged_early = true;
			break;
		}
	}
	r.state = u.real_part();
	r.state *= 1.0 / r.state.l2_norm();
	return r;
}

inline std::vector<double> energy_error_series(const GroundStateResult& r, double e0_ref)
{
	if(e0_ref == 0.0)
	{
		throw ValidationError("reference energy must be nonzero");
	}
	std::vector<double> out;
	out.reserve(r.energy_history.size());
	for(const auto& [t, e] : r.energy_history)
	{
		out.push_back(std::abs(e0_ref - e) / std::abs(e0_ref));
	}
	return out;
}

/// Whole-space solution of du/dt = alpha Laplace(u) + beta v |x|^2 u from
/// u(0) = c1 exp(-c2 |x|^2). With u = c1 exp(p |x|^2 + q) the exponents obey
/// p' = 4 alpha p^2 + beta v and q' = 2 alpha d p.
class GaussianAnsatz
{
public:
	GaussianAnsatz(double alpha, double beta_v, double c2 = 0.5, double c1 = 1.0, int dim = 1)
		: alpha_(alpha), k_(beta_v / (4.0 * alpha)), p0_(-c2), c1_(c1), d_(dim)
	{
		if(!(alpha > 0.0) || !(c2 > 0.0))
		{
			throw ValidationError("Gaussian ansatz needs alpha > 0 and c2 > 0");
		}
	}

	/// First time at which p (and u) blows up; infinity if never.
	[[nodiscard]] double blowup_time() const
	{
		if(k_ > 0.0)
		{
			const double s = std::sqrt(k_);
			return (std::numbers::pi / 2.0 - std::atan(p0_ / s)) / (4.0 * alpha_ * s);
		}
		return std::numeric_limits<double>::infinity();
	}

	[[nodiscard]] std::pair<double, double> exponents(double t) const
	{
		if(!(t >= 0.0) || t >= blowup_time())
		{
			throw DomainError("Gaussian ansatz is only defined on [0, " + format_real(blowup_time()) + "), got t = " + format_real(t));
		}
		const double d = d_;
		if(k_ > 0.0)
		{
			const double s = std::sqrt(k_);
			const double c = std::atan(p0_ / s);
			const double th = 4.0 * alpha_ * s * t + c;
			return {s * std::tan(th), -0.5 * d * std::log(std::cos(th) / std::cos(c))};
		}
		if(k_ == 0.0)
		{
			const double w = 1.0 - 4.0 * alpha_ * p0_ * t;
			return {p0_ / w, -0.5 * d * std::log(w)};
		}
		const double kappa = std::sqrt(-k_);
		const double ratio = -p0_ / kappa;
		if(std::abs(ratio - 1.0) < 1e-15)
		{
			return {p0_, 2.0 * alpha_ * d * p0_ * t};
		}
		const double th_rate = 4.0 * alpha_ * kappa * t;
		if(ratio < 1.0)
		{
			const double dd = std::atanh(ratio);
			const double th = th_rate + dd;
			return {-kappa * std::tanh(th), -0.5 * d * std::log(std::cosh(th) / std::cosh(dd))};
		}
		const double dd = std::atanh(1.0 / ratio);
		const double th = th_rate + dd;
		return {-kappa / std::tanh(th), -0.5 * d * std::log(std::sinh(th) / std::sinh(dd))};
	}

	[[nodiscard]] double operator()(double t, const std::array<double, 3>& x) const
	{
		const auto [p, q] = exponents(t);
		double r2 = 0.0;
		for(int axis = 0; axis < d_; ++axis)
		{
			r2 += x[axis] * x[axis];
		}
		return c1_ * std::exp(p * r2 + q);
	}

	[[nodiscard]] Field sample(const GridPtr& grid, double t) const
	{
		if(grid->dim() != d_)
		{
			throw ValidationError("Gaussian ansatz dimension does not match the grid");
		}
		Field f(grid);
		for(std::size_t k = 0; k < f.size(); ++k)
		{
			f[k] = (*this)(t, grid->node(k));
		}
		return f;
	}

private:
	double alpha_;
	double k_;
	double p0_;
	double c1_;
	int d_;
};

/// Exact solution e^{-t} exp(-x^2/2) of du/dt = u_xx - x^2 u, u(0) = exp(-x^2/2),
/// sampled at the grid nodes.
inline Field exact_gaussian_oracle(double t, const GridPtr& grid)
{
	return GaussianAnsatz(1.0, -1.0, 0.5, 1.0, grid->dim()).sample(grid, t);
}

} // namespace scsplit
