#pragma once
// Error taxonomy shared across the library.

#include <stdexcept>
#include <string>

namespace monq {

// A parameter is outside its physical or algorithmic domain.
class ParameterDomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A likelihood or normalization underflowed to zero.
class NumericalUnderflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Conditioning on an event of (numerically) vanishing probability.
class DegenerateConditioningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A selection filter left no trajectories to average.
class EmptySubsetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Not enough data points for the requested statistic.
class InsufficientDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A diagnostic integrator left its validity regime.
class IntegratorInstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration input; message carries file:line anchors.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace monq
