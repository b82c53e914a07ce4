#pragma once

#include "error.hpp"
#include "expression.hpp"
#include "field.hpp"
#include "grid.hpp"
#include "keyvalue.hpp"
#include "numeric.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scsplit
{

/// du/dt = alpha Laplace(u) + beta V(x) u on a periodic grid.
class ProblemSpec
{
public:
	ProblemSpec(GridPtr grid, cplx alpha, cplx beta, std::vector<double> potential)
		: grid_(std::move(grid)), alpha_(alpha), beta_(beta), potential_(std::move(potential))
	{
		if(potential_.size() != grid_->size())
		{
			throw ValidationError("potential has " + std::to_string(potential_.size()) + " values, grid has " +
				std::to_string(grid_->size()) + " nodes");
		}
		for(std::size_t k = 0; k < potential_.size(); ++k)
		{
			if(!std::isfinite(potential_[k]))
			{
				throw ValidationError("potential is not finite at node " + std::to_string(k));
			}
		}
		if(!is_finite(alpha) || !is_finite(beta))
		{
			throw ValidationError("alpha and beta must be finite");
		}
	}

	[[nodiscard]] const GridPtr& grid_ptr() const { return grid_; }
	[[nodiscard]] const SpectralGrid& grid() const { return *grid_; }
	[[nodiscard]] cplx alpha() const { return alpha_; }
	[[nodiscard]] cplx beta() const { return beta_; }
	[[nodiscard]] const std::vector<double>& potential() const { return potential_; }
	[[nodiscard]] bool is_real() const { return alpha_.imag() == 0.0 && beta_.imag() == 0.0; }
	[[nodiscard]] bool potential_is_zero() const
	{
		for(double v : potential_)
		{
			if(v != 0.0)
			{
				return false;
			}
		}
		return true;
	}
	/// Real positive alpha: the Laplacian part is parabolic.
	[[nodiscard]] bool is_parabolic() const { return alpha_.imag() == 0.0 && alpha_.real() > 0.0; }

private:
	GridPtr grid_;
	cplx alpha_;
	cplx beta_;
	std::vector<double> potential_;
};

inline const std::vector<std::string>& potential_names()
{
	static const std::vector<std::string> names = {"zero", "quadratic", "harmonic", "quartic"};
	return names;
}

/// zero: 0; quadratic: |x|^2; harmonic: |x|^2/2; quartic: 5 - |x|^2/2 + |x|^4/80.
inline std::vector<double> sample_potential(const SpectralGrid& grid, std::string_view id)
{
	std::vector<double> v(grid.size());
	for(std::size_t k = 0; k < v.size(); ++k)
	{
		const auto x = grid.node(k);
		const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
		if(id == "zero")
		{
			v[k] = 0.0;
		}
		else if(id == "quadratic")
		{
			v[k] = r2;
		}
		else if(id == "harmonic")
		{
			v[k] = 0.5 * r2;
		}
		else if(id == "quartic")
		{
			v[k] = 5.0 - 0.5 * r2 + r2 * r2 / 80.0;
		}
		else
		{
			std::string msg = "unknown potential '" + std::string(id) + "'; valid names:";
			for(const auto& n : potential_names())
			{
				msg += " " + n;
			}
			throw ValidationError(msg);
		}
	}
	return v;
}

inline std::vector<double> sample_potential(const SpectralGrid& grid, const Expression& expr)
{
	std::vector<double> v(grid.size());
	for(std::size_t k = 0; k < v.size(); ++k)
	{
		v[k] = expr(grid.node(k));
	}
	return v;
}

/// Potential file: a `potential=<expression>` line, `#` comments allowed.
inline Expression load_potential_file(const std::filesystem::path& path)
{
	const auto doc = KeyValueDocument::load(path);
	return Expression::parse(doc.require("", "potential"));
}

/// c1 exp(-c2 |x - c3|^2) at the nodes.
inline Field sample_gaussian(const GridPtr& grid, double c1, double c2, std::array<double, 3> c3 = {0.0, 0.0, 0.0})
{
	if(!(c2 > 0.0))
	{
		throw ValidationError("Gaussian width parameter c2 must be positive");
	}
	Field f(grid);
	for(std::size_t k = 0; k < f.size(); ++k)
	{
		const auto x = grid->node(k);
		double r2 = 0.0;
		for(int axis = 0; axis < grid->dim(); ++axis)
		{
			r2 += (x[axis] - c3[axis]) * (x[axis] - c3[axis]);
		}
		f[k] = c1 * std::exp(-c2 * r2);
	}
	return f;
}

namespace detail
{

inline void check_flow_result(const Field& f, char kind, cplx c, double h)
{
	for(std::size_t k = 0; k < f.size(); ++k)
	{
		if(!is_finite(f[k]))
		{
			throw OverflowError(std::string("flow ") + kind + " with c = " + format_complex(c) + ", h = " +
				format_real(h) + " is not finite at index " + std::to_string(k));
		}
	}
}

} // namespace detail

/// Multipliers exp(c h alpha lambda_m) in spectral order.
inline std::vector<cplx> flow_A_multipliers(const ProblemSpec& spec, cplx c, double h)
{
	const auto& lambda = spec.grid().laplacian_symbol();
	std::vector<cplx> m(lambda.size());
	const cplx z = c * h * spec.alpha();
	for(std::size_t k = 0; k < m.size(); ++k)
	{
		m[k] = std::exp(z * lambda[k]);
	}
	return m;
}

/// Multipliers exp(c h beta V(x_j)) in node order; throws naming the first
/// node whose factor overflows.
inline std::vector<cplx> flow_B_multipliers(const ProblemSpec& spec, cplx c, double h)
{
	const auto& v = spec.potential();
	std::vector<cplx> m(v.size());
	const cplx z = c * h * spec.beta();
	for(std::size_t k = 0; k < m.size(); ++k)
	{
		const cplx exponent = z * v[k];
		m[k] = std::exp(exponent);
		if(!is_finite(m[k]))
		{
			throw OverflowError("potential flow overflows at node " + std::to_string(k) + ": exponent " +
				format_complex(exponent));
		}
	}
	return m;
}

inline Field flow_A(const Field& state, cplx c, double h, const ProblemSpec& spec)
{
	if(!(h > 0.0))
	{
		throw ValidationError("flow_A needs h > 0");
	}
	const bool nodal = state.representation() == Representation::Nodal;
	Field f = state.spectral();
	const auto m = flow_A_multipliers(spec, c, h);
	for(std::size_t k = 0; k < f.size(); ++k)
	{
		f[k] *= m[k];
	}
	if(nodal)
	{
		f.to_nodal();
	}
	detail::check_flow_result(f, 'A', c, h);
	return f;
}

inline Field flow_B(const Field& state, cplx c, double h, const ProblemSpec& spec)
{
	if(!(h > 0.0))
	{
		throw ValidationError("flow_B needs h > 0");
	}
	const bool spectral = state.representation() == Representation::Spectral;
	Field f = state.nodal();
	const auto m = flow_B_multipliers(spec, c, h);
	for(std::size_t k = 0; k < f.size(); ++k)
	{
		f[k] *= m[k];
		if(!is_finite(f[k]))
		{
			throw OverflowError("potential flow overflows at node " + std::to_string(k) + ": exponent " +
				format_complex(c * h * spec.beta() * spec.potential()[k]));
		}
	}
	if(spectral)
	{
		f.to_spectral();
	}
	return f;
}

/// <u, (alpha Laplace + beta V) u> / <u, u>; Laplacian part spectrally,
/// potential part at the nodes. Quadrature weights cancel.
inline cplx rayleigh_quotient(const Field& state, const ProblemSpec& spec)
{
	const Field u = state.nodal();
	const Field uh = u.spectral();
	const auto& lambda = spec.grid().laplacian_symbol();
	const auto& v = spec.potential();
	double kinetic = 0.0;
	double potential = 0.0;
	double mass = 0.0;
	for(std::size_t k = 0; k < u.size(); ++k)
	{
		kinetic += lambda[k] * std::norm(uh[k]);
		potential += v[k] * std::norm(u[k]);
		mass += std::norm(u[k]);
	}
	if(mass == 0.0)
	{
		throw ValidationError("Rayleigh quotient of a zero state");
	}
	kinetic *= static_cast<double>(u.size());
	return (spec.alpha() * kinetic + spec.beta() * potential) / mass;
}

} // namespace scsplit
