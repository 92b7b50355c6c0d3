#pragma once

#include <stdexcept>
#include <string>

namespace agesis {

/// Bad argument values (non-finite rates, out-of-range indices, malformed grids).
class invalid_parameter : public std::invalid_argument {
public:
    explicit invalid_parameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation called on an object that cannot support it (e.g. a diagnostic
/// that requires a constant recovery kernel, or a non-viable demography).
class invalid_usage : public std::logic_error {
public:
    explicit invalid_usage(const std::string& what) : std::logic_error(what) {}
};

/// A solver or integrator failed (lost bracket, non-finite state).
class numerical_failure : public std::runtime_error {
public:
    explicit numerical_failure(const std::string& what) : std::runtime_error(what) {}
};

/// A diagnostic is undefined at the requested state (e.g. log of a
/// non-positive density); the computation itself is fine.
class diagnostic_unavailable : public std::runtime_error {
public:
    explicit diagnostic_unavailable(const std::string& what) : std::runtime_error(what) {}
};

} // namespace agesis
