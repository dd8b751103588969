#include "tomsc/nn/parameter.hpp"

namespace tomsc::nn {

namespace {

void require_finite(const std::string& name, const Mat& m) {
  if (!m.allFinite()) fail("parameter '", name, "': non-finite value rejected");
}

}  // namespace

Parameter::Parameter(std::string name, Index rows, Index cols)
    : name_(std::move(name)), value_(Mat::Zero(rows, cols)), grad_(Mat::Zero(rows, cols)) {}

Parameter::Parameter(std::string name, Mat value) : name_(std::move(name)) {
  require_finite(name_, value);
  value_ = std::move(value);
  grad_ = Mat::Zero(value_.rows(), value_.cols());
}

void Parameter::set_value(const Mat& value) {
  if (value.rows() != value_.rows() || value.cols() != value_.cols()) {
    throw DimensionError(concat("parameter '", name_, "': shape ", value_.rows(), "x", value_.cols(),
                                " cannot take ", value.rows(), "x", value.cols()));
  }
  require_finite(name_, value);
  value_ = value;
}

void Parameter::apply_delta(const Mat& delta) {
  if (delta.rows() != value_.rows() || delta.cols() != value_.cols()) {
    throw DimensionError(concat("parameter '", name_, "': update shape ", delta.rows(), "x",
                                delta.cols(), " does not match ", value_.rows(), "x", value_.cols()));
  }
  Mat next = value_ + delta;
  require_finite(name_, next);
  value_ = std::move(next);
}

void zero_grads(const ParameterList& params) {
  for (auto* p : params) p->zero_grad();
}

void copy_values(const ParameterList& from, const ParameterList& to) {
  if (from.size() != to.size()) fail("copy_values: ", from.size(), " vs ", to.size(), " parameters");
  for (std::size_t i = 0; i < from.size(); ++i) to[i]->set_value(from[i]->value());
}

}  // namespace tomsc::nn
