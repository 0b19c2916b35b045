#pragma once

#include <stdexcept>
#include <string>

namespace ergo {

// Argument and precondition violations use std::invalid_argument and
// std::domain_error directly; the types below cover runtime conditions that
// callers may want to distinguish.

class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSpectrumError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PostSelectionFailure : public std::runtime_error {
 public:
  PostSelectionFailure(const std::string& what, int round, double probability)
      : std::runtime_error(what), round_(round), probability_(probability) {}
  int round() const noexcept { return round_; }
  double probability() const noexcept { return probability_; }

 private:
  int round_;
  double probability_;
};

}  // namespace ergo
