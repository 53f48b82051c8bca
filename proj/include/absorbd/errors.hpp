#pragma once

#include <stdexcept>
#include <string>

namespace absorbd {

/// A structural guarantee failed on a concrete instance. These are the
/// falsification paths: the CLI exits with code 3 and the harness
/// records the instance as a counterexample.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class ExtremeNotDeterministic : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

class OrderBoundViolated : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

class NoDecomposition : public InvariantViolation {
 public:
  using InvariantViolation::InvariantViolation;
};

}  // namespace absorbd
