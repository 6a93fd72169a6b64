#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simineq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

/// Inputs whose shapes do not agree (panel vs. dataset, J mismatch, ...).
class ConformanceError : public Error
{
  public:
    using Error::Error;
};

/// A moment with zero estimated variance, or a sample too small to estimate one.
class DegenerateError : public Error
{
  public:
    DegenerateError(std::string const& what, std::size_t moment)
        : Error(what), moment_(moment)
    {
    }
    explicit DegenerateError(std::string const& what) : Error(what) {}

    /// Offending moment index, or npos when the whole sample is degenerate.
    std::size_t moment() const noexcept { return moment_; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  private:
    std::size_t moment_ = npos;
};

/// Out-of-domain tuning parameter (mu <= 0, alpha outside (0,1), ...).
class ParameterError : public Error
{
  public:
    using Error::Error;
};

/// Singular or numerically indefinite weighting matrix.
class ConditioningError : public Error
{
  public:
    using Error::Error;
};

/// Malformed experiment configuration; names the offending key.
class ConfigError : public Error
{
  public:
    ConfigError(std::string const& key, std::string const& what)
        : Error("config key '" + key + "': " + what), key_(key)
    {
    }
    std::string const& key() const noexcept { return key_; }

  private:
    std::string key_;
};

}  // namespace simineq
