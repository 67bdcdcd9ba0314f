#pragma once

#include <stdexcept>
#include <string>

namespace levytrade {

/// Invalid or inconsistent scenario configuration. Carries the offending
/// field name so the CLI can report it.
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }

    const std::string& field() const noexcept { return field_; }

  private:
    std::string field_;
};

/// A numerical routine failed to reach its tolerance or hit a singular
/// problem it cannot repair.
class NumericalError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace levytrade
