#pragma once

#include <stdexcept>
#include <string>

namespace relasso {

// Thrown when a caller violates a documented precondition (dimension
// mismatch, invalid configuration value, malformed input file).
class ContractError : public std::invalid_argument {
  public:
    explicit ContractError(const std::string& what) : std::invalid_argument(what) {}
};

// Thrown when training produces a non-finite or exploding loss.
class DivergenceError : public std::runtime_error {
  public:
    DivergenceError(const std::string& what, int epoch)
        : std::runtime_error(what), epoch_(epoch) {}

    int epoch() const { return epoch_; }

  private:
    int epoch_;
};

}  // namespace relasso
