#pragma once

#include "error.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <numbers>
#include <string>
#include <string_view>

namespace scsplit
{

using cplx = std::complex<double>;

inline constexpr cplx imag_unit{0.0, 1.0};

inline bool is_finite(cplx z)
{
	return std::isfinite(z.real()) && std::isfinite(z.imag());
}

/// 17 significant digits, enough to round-trip any double.
inline std::string format_real(double v)
{
	char buf[40];
	std::snprintf(buf, sizeof buf, "%.17g", v);
	return buf;
}

inline std::string_view trim(std::string_view s)
{
	const auto first = s.find_first_not_of(" \t\r\n");
	if(first == std::string_view::npos)
	{
		return {};
	}
	const auto last = s.find_last_not_of(" \t\r\n");
	return s.substr(first, last - first + 1);
}

inline double parse_real(std::string_view text)
{
	const std::string s(trim(text));
	if(s.empty())
	{
		throw ParseError("expected a number, got an empty string");
	}
	char* end = nullptr;
	const double v = std::strtod(s.c_str(), &end);
	if(end != s.c_str() + s.size())
	{
		throw ParseError("not a number: '" + s + "'");
	}
	return v;
}

/// Accepts "0.5", "-1i", "i", "0.5+0.25i", "1e-3-2e-1i" (a trailing 'j' works too).
inline cplx parse_complex(std::string_view text)
{
	std::string s;
	for(char ch : text)
	{
		if(ch != ' ' && ch != '\t')
		{
			s.push_back(ch);
		}
	}
	if(s.empty())
	{
		throw ParseError("expected a complex number, got an empty string");
	}
	if(s.back() != 'i' && s.back() != 'j')
	{
		return {parse_real(s), 0.0};
	}
	s.pop_back();
	// split at the last sign that is not an exponent sign
	std::size_t split = std::string::npos;
	for(std::size_t k = s.size(); k-- > 1;)
	{
		if((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E')
		{
			split = k;
			break;
		}
	}
	const auto imag_of = [](const std::string& t) {
		if(t.empty() || t == "+")
		{
			return 1.0;
		}
		if(t == "-")
		{
			return -1.0;
		}
		return parse_real(t);
	};
	if(split == std::string::npos)
	{
		return {0.0, imag_of(s)};
	}
	return {parse_real(s.substr(0, split)), imag_of(s.substr(split))};
}

inline std::string format_complex(cplx z)
{
	std::string out = format_real(z.real());
	if(z.imag() >= 0 || std::isnan(z.imag()))
	{
		out += "+";
	}
	return out + format_real(z.imag()) + "i";
}

} // namespace scsplit
