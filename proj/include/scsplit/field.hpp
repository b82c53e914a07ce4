#pragma once

#include "error.hpp"
#include "grid.hpp"
#include "numeric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace scsplit
{

enum class Representation
{
	Nodal,
	Spectral
};

/// Complex state on a grid, either as node values or as spectral coefficients.
class Field
{
public:
	explicit Field(GridPtr grid, Representation rep = Representation::Nodal)
		: grid_(std::move(grid)), values_(grid_->size()), rep_(rep)
	{
	}

	Field(GridPtr grid, std::vector<cplx> values, Representation rep = Representation::Nodal)
		: grid_(std::move(grid)), values_(std::move(values)), rep_(rep)
	{
		if(values_.size() != grid_->size())
		{
			throw ValidationError("field has " + std::to_string(values_.size()) + " values, grid has " +
				std::to_string(grid_->size()) + " nodes");
		}
	}

	[[nodiscard]] const GridPtr& grid_ptr() const { return grid_; }
	[[nodiscard]] const SpectralGrid& grid() const { return *grid_; }
	[[nodiscard]] Representation representation() const { return rep_; }
	[[nodiscard]] std::size_t size() const { return values_.size(); }
	[[nodiscard]] std::span<cplx> values() { return values_; }
	[[nodiscard]] std::span<const cplx> values() const { return values_; }
	[[nodiscard]] cplx& operator[](std::size_t k) { return values_[k]; }
	[[nodiscard]] cplx operator[](std::size_t k) const { return values_[k]; }

	Field& to_spectral()
	{
		if(rep_ == Representation::Nodal)
		{
			grid_->forward(values_);
			rep_ = Representation::Spectral;
		}
		return *this;
	}

	Field& to_nodal()
	{
		if(rep_ == Representation::Spectral)
		{
			grid_->backward(values_);
			rep_ = Representation::Nodal;
		}
		return *this;
	}

	[[nodiscard]] Field spectral() const
	{
		Field f = *this;
		return std::move(f.to_spectral());
	}

	[[nodiscard]] Field nodal() const
	{
		Field f = *this;
		return std::move(f.to_nodal());
	}

	/// Plain Euclidean norm of the node values; for spectral storage the
	/// coefficients are rescaled by sqrt(M^d) so the value does not depend on
	/// the representation.
	[[nodiscard]] double norm() const
	{
		double s = 0.0;
		for(auto v : values_)
		{
			s += std::norm(v);
		}
		if(rep_ == Representation::Spectral)
		{
			s *= static_cast<double>(values_.size());
		}
		return std::sqrt(s);
	}

	/// Discrete L2 norm with trapezoidal weights.
	[[nodiscard]] double l2_norm() const { return norm() * std::sqrt(grid_->cell_volume()); }

	[[nodiscard]] double max_norm() const
	{
		require_nodal("max_norm");
		double m = 0.0;
		for(auto v : values_)
		{
			m = std::max(m, std::abs(v));
		}
		return m;
	}

	[[nodiscard]] double imag_norm() const
	{
		require_nodal("imag_norm");
		double s = 0.0;
		for(auto v : values_)
		{
			s += v.imag() * v.imag();
		}
		return std::sqrt(s);
	}

	[[nodiscard]] double imag_max_norm() const
	{
		require_nodal("imag_max_norm");
		double m = 0.0;
		for(auto v : values_)
		{
			m = std::max(m, std::abs(v.imag()));
		}
		return m;
	}

	[[nodiscard]] bool all_finite() const
	{
		return std::all_of(values_.begin(), values_.end(), [](cplx v) { return is_finite(v); });
	}

	[[nodiscard]] Field real_part() const
	{
		require_nodal("real_part");
		Field f = *this;
		for(auto& v : f.values_)
		{
			v = v.real();
		}
		return f;
	}

	Field& operator*=(cplx s)
	{
		for(auto& v : values_)
		{
			v *= s;
		}
		return *this;
	}

	Field& operator+=(const Field& o)
	{
		check_compatible(o);
		for(std::size_t k = 0; k < values_.size(); ++k)
		{
			values_[k] += o.values_[k];
		}
		return *this;
	}

	Field& operator-=(const Field& o)
	{
		check_compatible(o);
		for(std::size_t k = 0; k < values_.size(); ++k)
		{
			values_[k] -= o.values_[k];
		}
		return *this;
	}

	friend Field operator-(Field lhs, const Field& rhs) { return std::move(lhs -= rhs); }
	friend Field operator+(Field lhs, const Field& rhs) { return std::move(lhs += rhs); }
	friend Field operator*(cplx s, Field f) { return std::move(f *= s); }

private:
	void require_nodal(const char* what) const
	{
		if(rep_ != Representation::Nodal)
		{
			throw ValidationError(std::string(what) + " needs a nodal field");
		}
	}

	void check_compatible(const Field& o) const
	{
		if(rep_ != o.rep_ || !grid_->same_shape(*o.grid_))
		{
			throw ValidationError("fields live on different grids or representations");
		}
	}

	GridPtr grid_;
	std::vector<cplx> values_;
	Representation rep_;
};

/// ||u - ref|| / ||ref|| in the Euclidean norm.
inline double relative_distance(const Field& u, const Field& ref)
{
	return (u.nodal() - ref.nodal()).norm() / ref.norm();
}

/// Trapezoidal inner product sum conj(u) v (2a/M)^d of nodal fields.
inline cplx inner_product(const Field& u, const Field& v)
{
	const auto un = u.nodal();
	const auto vn = v.nodal();
	cplx s = 0;
	for(std::size_t k = 0; k < un.size(); ++k)
	{
		s += std::conj(un[k]) * vn[k];
	}
	return s * u.grid().cell_volume();
}

namespace detail
{

inline void write_le_double(std::ostream& out, double v)
{
	auto bits = std::bit_cast<std::uint64_t>(v);
	if constexpr(std::endian::native == std::endian::big)
	{
		bits = __builtin_bswap64(bits);
	}
	char buf[8];
	std::memcpy(buf, &bits, 8);
	out.write(buf, 8);
}

inline double read_le_double(std::istream& in)
{
	char buf[8];
	if(!in.read(buf, 8))
	{
		throw ParseError("truncated binary dump");
	}
	std::uint64_t bits = 0;
	std::memcpy(&bits, buf, 8);
	if constexpr(std::endian::native == std::endian::big)
	{
		bits = __builtin_bswap64(bits);
	}
	return std::bit_cast<double>(bits);
}

/// Header (d, M, a) as float64 followed by interleaved (Re, Im) float64 pairs.
inline void write_complex_dump(const std::filesystem::path& path, double d, double m, double a, std::span<const cplx> data)
{
	std::ofstream out(path, std::ios::binary);
	if(!out)
	{
		throw ValidationError("cannot write '" + path.string() + "'");
	}
	write_le_double(out, d);
	write_le_double(out, m);
	write_le_double(out, a);
	for(auto v : data)
	{
		write_le_double(out, v.real());
		write_le_double(out, v.imag());
	}
}

} // namespace detail

inline void write_field(const Field& f, const std::filesystem::path& path)
{
	const auto n = f.nodal();
	detail::write_complex_dump(path, f.grid().dim(), f.grid().modes(), f.grid().half_width(), n.values());
}

inline Field read_field(const std::filesystem::path& path)
{
	std::ifstream in(path, std::ios::binary);
	if(!in)
	{
		throw ValidationError("cannot open '" + path.string() + "'");
	}
	const double d = detail::read_le_double(in);
	const double m = detail::read_le_double(in);
	const double a = detail::read_le_double(in);
	auto grid = make_grid(a, static_cast<int>(d), static_cast<int>(m));
	std::vector<cplx> values(grid->size());
	for(auto& v : values)
	{
		const double re = detail::read_le_double(in);
		v = {re, detail::read_le_double(in)};
	}
	if(in.peek() != std::char_traits<char>::eof())
	{
		throw ParseError("trailing data in field dump '" + path.string() + "'");
	}
	return Field(std::move(grid), std::move(values));
}

} // namespace scsplit
