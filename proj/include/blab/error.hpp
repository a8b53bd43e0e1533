#pragma once

#include <stdexcept>
#include <string>

namespace blab {

// Bad input or violated precondition. The CLI maps this to exit code 2.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation that could not deliver a trustworthy answer. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ResonanceError : public NumericalError {
 public:
  ResonanceError(const std::string& what, double distance)
      : NumericalError(what), distance_(distance) {}
  double distance() const { return distance_; }

 private:
  double distance_;
};

}  // namespace blab
