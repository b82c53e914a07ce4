#pragma once

#include "scsplit/field.hpp"
#include "scsplit/matrix_lab.hpp"
#include "scsplit/numeric.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace testutil
{

using scsplit::cplx;

/// Small deterministic generators for property tests.
struct Gen
{
	explicit Gen(std::uint64_t seed) : rng(seed) {}

	double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
	int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
	cplx complex(double r) { return {uniform(-r, r), uniform(-r, r)}; }

	scsplit::Field field(const scsplit::GridPtr& g, bool real = false)
	{
		scsplit::Field f(g);
		for(auto& v : f.values())
		{
			v = real ? cplx(uniform(-1, 1), 0.0) : complex(1.0);
		}
		return f;
	}

	scsplit::RealMatrix symmetric(int n, double scale = 1.0)
	{
		scsplit::RealMatrix x(n, n);
		for(int i = 0; i < n; ++i)
		{
			for(int j = 0; j < n; ++j)
			{
				x(i, j) = uniform(-1, 1);
			}
		}
		return scale * (x + x.transpose()) / 2.0;
	}

	std::mt19937_64 rng;
};

/// exp(M) by scaling and squaring of a truncated Taylor series; independent of
/// any eigensolver.
inline scsplit::ComplexMatrix expm_taylor(const scsplit::ComplexMatrix& m)
{
	const double norm = m.cwiseAbs().rowwise().sum().maxCoeff();
	int s = 0;
	while(norm / std::pow(2.0, s) > 0.25)
	{
		++s;
	}
	const scsplit::ComplexMatrix a = m / std::pow(2.0, s);
	scsplit::ComplexMatrix term = scsplit::ComplexMatrix::Identity(m.rows(), m.cols());
	scsplit::ComplexMatrix sum = term;
	for(int k = 1; k <= 30; ++k)
	{
		term = term * a / static_cast<double>(k);
		sum += term;
	}
	for(int i = 0; i < s; ++i)
	{
		sum = sum * sum;
	}
	return sum;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
	double sx = 0, sy = 0, sxx = 0, sxy = 0;
	const auto n = static_cast<double>(x.size());
	for(std::size_t i = 0; i < x.size(); ++i)
	{
		const double lx = std::log(x[i]);
		const double ly = std::log(y[i]);
		sx += lx;
		sy += ly;
		sxx += lx * lx;
		sxy += lx * ly;
	}
	return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace testutil
