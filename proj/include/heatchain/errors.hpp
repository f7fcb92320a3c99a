#pragma once

#include <stdexcept>
#include <string>

namespace heatchain {

/// Invalid model parameters or potentials (bad config, |eta| >= 1, non-convex U2, ...).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A State whose (n, d) layout does not match the model it is evaluated against.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values, blow-up, or a solver that cannot produce a usable answer.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace heatchain
