#pragma once

#include <functional>
#include <stdexcept>
#include <string>

namespace wienerlab {

/// Bad input: out-of-range parameters, mismatched grids, budget overruns.
/// The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// NaN/Inf or another numerical breakdown. The CLI maps this to exit code 3.
class NumericalFault : public std::runtime_error {
public:
    explicit NumericalFault(const std::string& what) : std::runtime_error(what) {}
};

using WarningHandler = std::function<void(const std::string&)>;

/// Replaces the process-wide warning sink (default: stderr). Returns the old one.
WarningHandler set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

inline void require(bool cond, const std::string& message) {
    if (!cond) throw ValidationError(message);
}

}  // namespace wienerlab
