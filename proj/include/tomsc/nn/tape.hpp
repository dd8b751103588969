#pragma once

#include "tomsc/common.hpp"
#include "tomsc/nn/parameter.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <vector>

namespace tomsc::nn {

class Tape;

using SparseMat = Eigen::SparseMatrix<double>;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape
/// that produced it is alive and has not been cleared.
class Var {
 public:
  Var() = default;

  const Mat& value() const;
  /// Value of a 1x1 node.
  double scalar() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  Tape& tape() const;
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr && id_ >= 0; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Reverse-mode recording of one forward computation. A tape is rebuilt per
/// step: record the forward pass, call backward() on a scalar, then discard.
/// Gradients of Parameter leaves accumulate into Parameter::grad().
class Tape {
 public:
  using BackFn = std::function<void(Tape&, int)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Mat value);
  Var constant(double value);
  Var constant_row(const Vec& v);  ///< 1 x n
  Var constant_col(const Vec& v);  ///< n x 1
  Var param(Parameter& p);

  /// Propagates d(loss)/d(node) to every node and into parameter gradients.
  void backward(const Var& loss);

  /// Gradient of a node after backward(); zero matrix if unreachable.
  Mat grad(const Var& v) const;

  std::size_t size() const { return nodes_.size(); }
  void clear();

  // Op-author interface.
  Var record(Mat value, BackFn back);
  const Mat& value_of(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  /// Gradient accumulator for node `id`, allocated on first access.
  Mat& grad_of(int id);
  bool has_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].has_grad; }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool has_grad = false;
    Parameter* param = nullptr;
    BackFn back;
  };
  std::vector<Node> nodes_;
};

// Elementwise arithmetic. The right operand may broadcast when it is 1x1,
// 1 x cols (row vector repeated over rows) or rows x 1 (column repeated).
Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator-(const Var& a);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);

Var matmul(const Var& a, const Var& b);
/// a * b^T, the usual batch-major dense product with (out x in) weights.
Var matmul_nt(const Var& a, const Var& b);
Var transpose(const Var& a);

Var tanh(const Var& a);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var square(const Var& a);

Var sum(const Var& a);
Var mean(const Var& a);
/// Column sums, 1 x cols.
Var sum_rows(const Var& a);
/// Row sums, rows x 1.
Var sum_cols(const Var& a);

/// Row-wise softmax / log-softmax of logits / temperature.
Var softmax_rows(const Var& logits, double temperature = 1.0);
Var log_softmax_rows(const Var& logits, double temperature = 1.0);

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(const Var& a, Index start, Index count);
Var slice_rows(const Var& a, Index start, Index count);
/// Row-major reshape (element order read along rows).
Var reshape(const Var& a, Index rows, Index cols);
/// Fixed left factor times a recorded value; the constant is not put on the tape.
Var matmul_const(const Mat& a, const Var& b);
/// Sparse fixed left factor. `a` is held by reference and must outlive backward().
Var matmul_sparse(const SparseMat& a, const Var& b);

}  // namespace tomsc::nn
