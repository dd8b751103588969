#pragma once

#include "tomsc/common.hpp"

#include <string>
#include <vector>

namespace tomsc::nn {

/// A named trainable array with a same-shape gradient accumulator.
/// Values are always finite; writes of NaN/Inf are rejected.
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Index rows, Index cols);
  Parameter(std::string name, Mat value);

  const std::string& name() const { return name_; }
  void rename(std::string name) { name_ = std::move(name); }

  const Mat& value() const { return value_; }
  const Mat& grad() const { return grad_; }
  Mat& grad() { return grad_; }

  Index rows() const { return value_.rows(); }
  Index cols() const { return value_.cols(); }
  std::vector<Index> shape() const { return {value_.rows(), value_.cols()}; }

  /// Replaces the values; shape must match and every entry must be finite.
  void set_value(const Mat& value);
  /// Adds `delta` to the values (same rules as set_value).
  void apply_delta(const Mat& delta);
  void zero_grad() { grad_.setZero(); }

 private:
  std::string name_;
  Mat value_;
  Mat grad_;
};

using ParameterList = std::vector<Parameter*>;

void zero_grads(const ParameterList& params);

/// Copies values name-by-name position-wise; used for target-network sync.
void copy_values(const ParameterList& from, const ParameterList& to);

}  // namespace tomsc::nn
