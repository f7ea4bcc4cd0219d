#pragma once

#include <stdexcept>
#include <string>

namespace cme {

// Thrown when a numeric procedure fails to deliver its accuracy contract
// (quadrature non-convergence, root-finder stall, density underflow where a
// ratio is required).  Argument/domain/range problems use the std exceptions
// (std::invalid_argument, std::domain_error, std::out_of_range) directly.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Requested operation is outside what the object supports (e.g. a scalar
// channel over a vector-only prior).
class capability_error : public std::invalid_argument {
public:
    explicit capability_error(const std::string& what) : std::invalid_argument(what) {}
};

} // namespace cme
