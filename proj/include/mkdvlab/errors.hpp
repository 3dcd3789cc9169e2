#pragma once

#include <stdexcept>
#include <string>

namespace mkdv {

/// Precondition or configuration violation (bad grid, unsorted speeds, ...).
/// The CLI maps this to exit code 1.
class validation_error : public std::invalid_argument {
  public:
    explicit validation_error(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical-health failure at runtime: ambiguous inertia split, optimizer
/// non-convergence, blow-up guard. The CLI maps this to exit code 2.
class numerical_error : public std::runtime_error {
  public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}
