#ifndef NUMPMP_COMMON_HPP_
#define NUMPMP_COMMON_HPP_

#include <stdexcept>
#include <string>

namespace numpmp {

// Invalid model data: bad routes, capacities, weights, or files that parse
// but violate a model invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Numerical failure inside the solver (non-finite state, prox root finding
// failure). The message carries the iteration number when known.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

// Failure of a reference solver. Test infrastructure failure, not a product
// failure.
class OracleError : public std::runtime_error {
 public:
  explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or unreadable files. Messages carry 1-based line numbers for
// text formats.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid generator specification or a perturbation that leaves no problem
// behind (all links failed, no surviving streams).
class GenError : public std::runtime_error {
 public:
  explicit GenError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace numpmp

#endif  // NUMPMP_COMMON_HPP_
