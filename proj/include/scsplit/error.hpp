#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scsplit
{

/// Root of every error raised by the library.
class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Bad input: unknown names, malformed files, violated preconditions.
class ValidationError : public Error
{
public:
	using Error::Error;
};

class ParseError : public ValidationError
{
public:
	using ValidationError::ValidationError;
};

/// Coefficient sums away from one.
class ConsistencyError : public ValidationError
{
public:
	using ValidationError::ValidationError;
};

/// A scheme or coefficient choice that is known to be unstable for the
/// problem at hand and no override was given.
class StabilityError : public ValidationError
{
public:
	using ValidationError::ValidationError;
};

class DomainError : public ValidationError
{
public:
	using ValidationError::ValidationError;
};

/// Failures that only show up while computing.
class NumericalError : public Error
{
public:
	using Error::Error;
};

class OverflowError : public NumericalError
{
public:
	using NumericalError::NumericalError;
};

/// Non-finite values after a splitting stage; `stage()` is the 1-based
/// index j of the coefficient pair (a_j, b_j) whose flow blew up.
class InstabilityError : public NumericalError
{
public:
	InstabilityError(const std::string& what, std::size_t stage)
		: NumericalError(what), stage_(stage)
	{
	}

	[[nodiscard]] std::size_t stage() const noexcept { return stage_; }

private:
	std::size_t stage_;
};

class ControllerError : public NumericalError
{
public:
	using NumericalError::NumericalError;
};

class LogarithmError : public NumericalError
{
public:
	using NumericalError::NumericalError;
};

class ConstructionError : public NumericalError
{
public:
	using NumericalError::NumericalError;
};

} // namespace scsplit
