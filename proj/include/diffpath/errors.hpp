#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace diffpath {

// Contract violations (bad indices, bad sizes) throw std::invalid_argument or
// std::out_of_range. The types below are the recoverable failures callers are
// expected to distinguish.

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InsufficientSamples : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NotSymmetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NotPSD : public std::domain_error {
 public:
  NotPSD(const std::string& what, double min_eigenvalue)
      : std::domain_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

class SingularActiveSet : public std::domain_error {
 public:
  SingularActiveSet(const std::string& what, std::size_t index)
      : std::domain_error(what), index_(index) {}
  // Column-major vec index of the entry whose addition made the block singular.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class OutOfRange : public std::out_of_range {
 public:
  OutOfRange(const std::string& what, double last_lambda)
      : std::out_of_range(what), last_lambda_(last_lambda) {}
  double last_lambda() const noexcept { return last_lambda_; }

 private:
  double last_lambda_;
};

class InfeasiblePerturbation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace diffpath
