#pragma once

#include "error.hpp"
#include "numeric.hpp"

#include <fftw3.h>

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace scsplit
{

namespace detail
{

// FFTW's planner is not thread safe; execution of an existing plan is.
inline std::mutex& fftw_planner_mutex()
{
	static std::mutex m;
	return m;
}

struct FftPlans
{
	fftw_plan forward = nullptr;
	fftw_plan backward = nullptr;

	FftPlans(int dim, int modes)
	{
		std::array<int, 3> n{modes, modes, modes};
		const std::size_t total = static_cast<std::size_t>(std::pow(modes, dim));
		// plans are created on a scratch buffer and later run via the new-array interface
		auto* scratch = fftw_alloc_complex(total);
		std::lock_guard lock(fftw_planner_mutex());
		const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
		forward = fftw_plan_dft(dim, n.data(), scratch, scratch, FFTW_FORWARD, flags);
		backward = fftw_plan_dft(dim, n.data(), scratch, scratch, FFTW_BACKWARD, flags);
		fftw_free(scratch);
		if(forward == nullptr || backward == nullptr)
		{
			throw Error("FFTW failed to create a plan");
		}
	}

	FftPlans(const FftPlans&) = delete;
	FftPlans& operator=(const FftPlans&) = delete;

	~FftPlans()
	{
		std::lock_guard lock(fftw_planner_mutex());
		fftw_destroy_plan(forward);
		fftw_destroy_plan(backward);
	}
};

} // namespace detail

/// Periodic box [-a, a]^d with M nodes per axis, x_j = -a + 2a j/M.
/// Nodes and modes are flat-indexed row-major (axis 0 slowest); modes per
/// axis are in FFT order 0, 1, .., M/2-1, -M/2, .., -1.
/// The forward transform carries the 1/M^d factor.
class SpectralGrid
{
public:
	SpectralGrid(double half_width, int dim, int modes) : a_(half_width), d_(dim), m_(modes)
	{
		if(!(half_width > 0.0) || !std::isfinite(half_width))
		{
			throw ValidationError("grid half-width must be positive");
		}
		if(dim < 1 || dim > 3)
		{
			throw ValidationError("grid dimension must be 1, 2 or 3");
		}
		if(modes < 2 || modes % 2 != 0)
		{
			throw ValidationError("grid modes per axis must be even and at least 2, got " + std::to_string(modes));
		}
		size_ = 1;
		for(int k = 0; k < dim; ++k)
		{
			size_ *= static_cast<std::size_t>(modes);
		}
		coords_.resize(modes);
		for(int j = 0; j < modes; ++j)
		{
			coords_[j] = -a_ + 2.0 * a_ * j / modes;
		}
		const double scale = -std::numbers::pi * std::numbers::pi / (a_ * a_);
		symbol_.resize(size_);
		for(std::size_t flat = 0; flat < size_; ++flat)
		{
			double m2 = 0.0;
			for(int axis = 0; axis < d_; ++axis)
			{
				const double m = static_cast<double>(mode_index(flat, axis));
				m2 += m * m;
			}
			symbol_[flat] = scale * m2;
		}
		plans_ = std::make_shared<detail::FftPlans>(dim, modes);
	}

	[[nodiscard]] double half_width() const { return a_; }
	[[nodiscard]] int dim() const { return d_; }
	[[nodiscard]] int modes() const { return m_; }
	[[nodiscard]] std::size_t size() const { return size_; }
	[[nodiscard]] double spacing() const { return 2.0 * a_ / m_; }
	/// Trapezoidal quadrature weight (2a/M)^d of every node.
	[[nodiscard]] double cell_volume() const { return std::pow(spacing(), d_); }
	/// Per-axis coordinates x_0..x_{M-1}.
	[[nodiscard]] const std::vector<double>& axis_coordinates() const { return coords_; }

	/// Grid index along `axis` of a flat index.
	[[nodiscard]] int node_index(std::size_t flat, int axis) const
	{
		std::size_t stride = 1;
		for(int k = d_ - 1; k > axis; --k)
		{
			stride *= static_cast<std::size_t>(m_);
		}
		return static_cast<int>((flat / stride) % static_cast<std::size_t>(m_));
	}

	[[nodiscard]] std::array<double, 3> node(std::size_t flat) const
	{
		std::array<double, 3> x{0.0, 0.0, 0.0};
		for(int axis = 0; axis < d_; ++axis)
		{
			x[axis] = coords_[node_index(flat, axis)];
		}
		return x;
	}

	/// Signed mode number along `axis` of a flat spectral index.
	[[nodiscard]] int mode_index(std::size_t flat, int axis) const
	{
		const int k = node_index(flat, axis);
		return k < m_ / 2 ? k : k - m_;
	}

	/// lambda_m = -pi^2 |m|^2 / a^2 in spectral storage order.
	[[nodiscard]] const std::vector<double>& laplacian_symbol() const { return symbol_; }

	void forward(std::span<cplx> data) const
	{
		check_size(data.size());
		fftw_execute_dft(plans_->forward, reinterpret_cast<fftw_complex*>(data.data()),
			reinterpret_cast<fftw_complex*>(data.data()));
		const double inv = 1.0 / static_cast<double>(size_);
		for(auto& v : data)
		{
			v *= inv;
		}
	}

	void backward(std::span<cplx> data) const
	{
		check_size(data.size());
		fftw_execute_dft(plans_->backward, reinterpret_cast<fftw_complex*>(data.data()),
			reinterpret_cast<fftw_complex*>(data.data()));
	}

	[[nodiscard]] bool same_shape(const SpectralGrid& other) const
	{
		return d_ == other.d_ && m_ == other.m_ && a_ == other.a_;
	}

private:
	void check_size(std::size_t n) const
	{
		if(n != size_)
		{
			throw ValidationError("array of length " + std::to_string(n) + " does not match grid size " +
				std::to_string(size_));
		}
	}

	double a_;
	int d_;
	int m_;
	std::size_t size_ = 0;
	std::vector<double> coords_;
	std::vector<double> symbol_;
	std::shared_ptr<detail::FftPlans> plans_;
};

using GridPtr = std::shared_ptr<const SpectralGrid>;

inline GridPtr make_grid(double half_width, int dim, int modes)
{
	return std::make_shared<const SpectralGrid>(half_width, dim, modes);
}

inline std::vector<double> laplacian_symbol(const SpectralGrid& grid)
{
	return grid.laplacian_symbol();
}

} // namespace scsplit
