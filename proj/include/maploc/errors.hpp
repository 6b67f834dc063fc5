#pragma once

#include <stdexcept>
#include <string>

namespace maploc {

// Raised for non-finite inputs, violated preconditions and malformed files.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a geometric or linear-algebra quantity degenerates
// (coincident points, ill-conditioned innovation covariance).
class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace maploc
