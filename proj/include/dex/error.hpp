#pragma once

#include <stdexcept>
#include <string>

namespace dex {

/// The instance violates a precondition that makes the rate problem
/// unsolvable, e.g. some user cannot decode from the allowed transmitters.
class InfeasibleInstance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive routine was asked to run beyond its size limit.
class GuardExceeded : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace dex
