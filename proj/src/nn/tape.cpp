#include "tomsc/nn/tape.hpp"

#include <cmath>

namespace tomsc::nn {

const Mat& Var::value() const {
  if (!valid()) fail("use of an empty Var");
  return tape_->value_of(id_);
}

double Var::scalar() const {
  const Mat& v = value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw DimensionError(concat("scalar() on a ", v.rows(), "x", v.cols(), " value"));
  }
  return v(0, 0);
}

Tape& Var::tape() const {
  if (!valid()) fail("use of an empty Var");
  return *tape_;
}

Var Tape::constant(Mat value) { return record(std::move(value), nullptr); }

Var Tape::constant(double value) { return record(Mat::Constant(1, 1, value), nullptr); }

Var Tape::constant_row(const Vec& v) { return record(Mat(v.transpose()), nullptr); }

Var Tape::constant_col(const Vec& v) { return record(Mat(v), nullptr); }

Var Tape::param(Parameter& p) {
  Var v = record(p.value(), nullptr);
  nodes_.back().param = &p;
  return v;
}

Var Tape::record(Mat value, BackFn back) {
  Node n;
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Mat& Tape::grad_of(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (!n.has_grad) {
    n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    n.has_grad = true;
  }
  return n.grad;
}

void Tape::backward(const Var& loss) {
  if (nodes_.empty()) fail("backward called before any forward pass was recorded");
  if (!loss.valid() || &loss.tape() != this || loss.id() >= static_cast<int>(nodes_.size())) {
    fail("backward: loss was not recorded on this tape");
  }
  const Mat& lv = value_of(loss.id());
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw DimensionError(concat("backward needs a scalar loss, got ", lv.rows(), "x", lv.cols()));
  }
  for (auto& n : nodes_) {
    n.has_grad = false;
  }
  grad_of(loss.id())(0, 0) = 1.0;
  for (int id = loss.id(); id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.has_grad) continue;
    if (n.back) n.back(*this, id);
    if (n.param != nullptr) n.param->grad() += nodes_[static_cast<std::size_t>(id)].grad;
  }
}

Mat Tape::grad(const Var& v) const {
  const Node& n = nodes_[static_cast<std::size_t>(v.id())];
  if (!n.has_grad) return Mat::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::clear() { nodes_.clear(); }

namespace {

enum class Broadcast { same, scalar, row, col };

Broadcast broadcast_kind(const Mat& a, const Mat& b, const char* op) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return Broadcast::same;
  if (b.rows() == 1 && b.cols() == 1) return Broadcast::scalar;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::row;
  if (b.cols() == 1 && b.rows() == a.rows()) return Broadcast::col;
  throw DimensionError(concat(op, ": cannot combine ", a.rows(), "x", a.cols(), " with ", b.rows(),
                              "x", b.cols()));
}

Mat expand(const Mat& b, Index rows, Index cols, Broadcast k) {
  switch (k) {
    case Broadcast::same: return b;
    case Broadcast::scalar: return Mat::Constant(rows, cols, b(0, 0));
    case Broadcast::row: return b.replicate(rows, 1);
    case Broadcast::col: return b.replicate(1, cols);
  }
  return b;
}

Mat reduce(const Mat& g, Broadcast k) {
  switch (k) {
    case Broadcast::same: return g;
    case Broadcast::scalar: return Mat::Constant(1, 1, g.sum());
    case Broadcast::row: return g.colwise().sum();
    case Broadcast::col: return g.rowwise().sum();
  }
  return g;
}

void same_tape(const Var& a, const Var& b) {
  if (&a.tape() != &b.tape()) fail("operands recorded on different tapes");
}

}  // namespace

Var operator+(const Var& a, const Var& b) {
  same_tape(a, b);
  const Mat& av = a.value();
  const Mat& bv = b.value();
  Broadcast k = broadcast_kind(av, bv, "add");
  Mat out = av + expand(bv, av.rows(), av.cols(), k);
  int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), [ia, ib, k](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    t.grad_of(ia) += g;
    t.grad_of(ib) += reduce(g, k);
  });
}

Var operator-(const Var& a, const Var& b) {
  same_tape(a, b);
  const Mat& av = a.value();
  const Mat& bv = b.value();
  Broadcast k = broadcast_kind(av, bv, "sub");
  Mat out = av - expand(bv, av.rows(), av.cols(), k);
  int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), [ia, ib, k](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    t.grad_of(ia) += g;
    t.grad_of(ib) -= reduce(g, k);
  });
}

Var operator*(const Var& a, const Var& b) {
  same_tape(a, b);
  const Mat& av = a.value();
  const Mat& bv = b.value();
  Broadcast k = broadcast_kind(av, bv, "mul");
  Mat be = expand(bv, av.rows(), av.cols(), k);
  Mat out = av.cwiseProduct(be);
  int ia = a.id(), ib = b.id();
  return a.tape().record(std::move(out), [ia, ib, k, be](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    const Mat& avv = t.value_of(ia);
    t.grad_of(ia) += g.cwiseProduct(be);
    t.grad_of(ib) += reduce(g.cwiseProduct(avv), k);
  });
}

Var operator-(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double s) {
  int ia = a.id();
  return a.tape().record(a.value() * s, [ia, s](Tape& t, int self) {
    t.grad_of(ia) += t.grad_of(self) * s;
  });
}

Var add_scalar(const Var& a, double s) {
  int ia = a.id();
  return a.tape().record(a.value().array() + s, [ia](Tape& t, int self) {
    t.grad_of(ia) += t.grad_of(self);
  });
}

Var matmul(const Var& a, const Var& b) {
  same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw DimensionError(concat("matmul: ", a.rows(), "x", a.cols(), " times ", b.rows(), "x", b.cols()));
  }
  int ia = a.id(), ib = b.id();
  return a.tape().record(a.value() * b.value(), [ia, ib](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    t.grad_of(ia) += g * t.value_of(ib).transpose();
    t.grad_of(ib) += t.value_of(ia).transpose() * g;
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  same_tape(a, b);
  if (a.cols() != b.cols()) {
    throw DimensionError(concat("input dimension ", a.cols(), " does not match layer input dimension ",
                                b.cols()));
  }
  int ia = a.id(), ib = b.id();
  return a.tape().record(a.value() * b.value().transpose(), [ia, ib](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    t.grad_of(ia) += g * t.value_of(ib);
    t.grad_of(ib) += g.transpose() * t.value_of(ia);
  });
}

Var transpose(const Var& a) {
  int ia = a.id();
  return a.tape().record(a.value().transpose(), [ia](Tape& t, int self) {
    t.grad_of(ia) += t.grad_of(self).transpose();
  });
}

Var tanh(const Var& a) {
  int ia = a.id();
  Mat out = a.value().array().tanh();
  return a.tape().record(std::move(out), [ia](Tape& t, int self) {
    const Mat& y = t.value_of(self);
    t.grad_of(ia) += t.grad_of(self).cwiseProduct((1.0 - y.array().square()).matrix());
  });
}

Var sigmoid(const Var& a) {
  int ia = a.id();
  Mat out = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return a.tape().record(std::move(out), [ia](Tape& t, int self) {
    const Mat& y = t.value_of(self);
    t.grad_of(ia) += t.grad_of(self).cwiseProduct((y.array() * (1.0 - y.array())).matrix());
  });
}

Var relu(const Var& a) {
  int ia = a.id();
  Mat out = a.value().cwiseMax(0.0);
  return a.tape().record(std::move(out), [ia](Tape& t, int self) {
    const Mat& x = t.value_of(ia);
    Mat mask = (x.array() > 0.0).cast<double>().matrix();
    t.grad_of(ia) += t.grad_of(self).cwiseProduct(mask);
  });
}

Var exp(const Var& a) {
  int ia = a.id();
  Mat out = a.value().array().exp();
  return a.tape().record(std::move(out), [ia](Tape& t, int self) {
    t.grad_of(ia) += t.grad_of(self).cwiseProduct(t.value_of(self));
  });
}

Var log(const Var& a) {
  int ia = a.id();
  if ((a.value().array() <= 0.0).any()) fail("log of a non-positive value");
  Mat out = a.value().array().log();
  return a.tape().record(std::move(out), [ia](Tape& t, int self) {
    t.grad_of(ia) += t.grad_of(self).cwiseQuotient(t.value_of(ia));
  });
}

Var square(const Var& a) {
  int ia = a.id();
  Mat out = a.value().array().square();
  return a.tape().record(std::move(out), [ia](Tape& t, int self) {
    t.grad_of(ia) += 2.0 * t.grad_of(self).cwiseProduct(t.value_of(ia));
  });
}

Var sum(const Var& a) {
  int ia = a.id();
  return a.tape().record(Mat::Constant(1, 1, a.value().sum()), [ia](Tape& t, int self) {
    const double g = t.grad_of(self)(0, 0);
    t.grad_of(ia).array() += g;
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  if (n == 0) fail("mean of an empty value");
  return scale(sum(a), 1.0 / n);
}

Var sum_rows(const Var& a) {
  int ia = a.id();
  return a.tape().record(a.value().colwise().sum(), [ia](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    Mat& ga = t.grad_of(ia);
    ga.rowwise() += g.row(0);
  });
}

Var sum_cols(const Var& a) {
  int ia = a.id();
  return a.tape().record(a.value().rowwise().sum(), [ia](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    Mat& ga = t.grad_of(ia);
    ga.colwise() += g.col(0);
  });
}

namespace {

Mat log_softmax_value(const Mat& logits, double temperature) {
  Mat scaled = logits / temperature;
  Mat out(scaled.rows(), scaled.cols());
  for (Index r = 0; r < scaled.rows(); ++r) {
    const double m = scaled.row(r).maxCoeff();
    const double lse = m + std::log((scaled.row(r).array() - m).exp().sum());
    out.row(r) = scaled.row(r).array() - lse;
  }
  return out;
}

}  // namespace

Var softmax_rows(const Var& logits, double temperature) {
  if (!(temperature > 0.0)) fail("softmax temperature must be positive, got ", temperature);
  if (!logits.value().allFinite()) fail("softmax of non-finite logits");
  int ia = logits.id();
  Mat out = log_softmax_value(logits.value(), temperature).array().exp();
  return logits.tape().record(std::move(out), [ia, temperature](Tape& t, int self) {
    const Mat& y = t.value_of(self);
    const Mat& g = t.grad_of(self);
    Mat gy = g.cwiseProduct(y);
    Vec dots = gy.rowwise().sum();
    Mat gin = gy - y.cwiseProduct(dots.replicate(1, y.cols()));
    t.grad_of(ia) += gin / temperature;
  });
}

Var log_softmax_rows(const Var& logits, double temperature) {
  if (!(temperature > 0.0)) fail("softmax temperature must be positive, got ", temperature);
  if (!logits.value().allFinite()) fail("log-softmax of non-finite logits");
  int ia = logits.id();
  Mat out = log_softmax_value(logits.value(), temperature);
  return logits.tape().record(std::move(out), [ia, temperature](Tape& t, int self) {
    const Mat p = t.value_of(self).array().exp();
    const Mat& g = t.grad_of(self);
    Vec gs = g.rowwise().sum();
    Mat gin = g - p.cwiseProduct(gs.replicate(1, p.cols()));
    t.grad_of(ia) += gin / temperature;
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) fail("concat_cols of nothing");
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    same_tape(parts.front(), p);
    if (p.rows() != rows) throw DimensionError(concat("concat_cols: row mismatch ", p.rows(), " vs ", rows));
    cols += p.cols();
  }
  Mat out(rows, cols);
  std::vector<std::pair<int, Index>> layout;
  Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    layout.emplace_back(p.id(), at);
    at += p.cols();
  }
  return parts.front().tape().record(std::move(out), [layout](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    for (const auto& [id, off] : layout) {
      Mat& gi = t.grad_of(id);
      gi += g.middleCols(off, gi.cols());
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) fail("concat_rows of nothing");
  const Index cols = parts.front().cols();
  Index rows = 0;
  for (const auto& p : parts) {
    same_tape(parts.front(), p);
    if (p.cols() != cols) throw DimensionError(concat("concat_rows: column mismatch ", p.cols(), " vs ", cols));
    rows += p.rows();
  }
  Mat out(rows, cols);
  std::vector<std::pair<int, Index>> layout;
  Index at = 0;
  for (const auto& p : parts) {
    out.middleRows(at, p.rows()) = p.value();
    layout.emplace_back(p.id(), at);
    at += p.rows();
  }
  return parts.front().tape().record(std::move(out), [layout](Tape& t, int self) {
    const Mat& g = t.grad_of(self);
    for (const auto& [id, off] : layout) {
      Mat& gi = t.grad_of(id);
      gi += g.middleRows(off, gi.rows());
    }
  });
}

Var slice_cols(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw DimensionError(concat("slice_cols [", start, ", ", start + count, ") of ", a.cols(), " columns"));
  }
  int ia = a.id();
  return a.tape().record(a.value().middleCols(start, count), [ia, start, count](Tape& t, int self) {
    t.grad_of(ia).middleCols(start, count) += t.grad_of(self);
  });
}

Var slice_rows(const Var& a, Index start, Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw DimensionError(concat("slice_rows [", start, ", ", start + count, ") of ", a.rows(), " rows"));
  }
  int ia = a.id();
  return a.tape().record(a.value().middleRows(start, count), [ia, start, count](Tape& t, int self) {
    t.grad_of(ia).middleRows(start, count) += t.grad_of(self);
  });
}

Var reshape(const Var& a, Index rows, Index cols) {
  if (rows * cols != a.rows() * a.cols()) {
    throw DimensionError(concat("reshape ", a.rows(), "x", a.cols(), " to ", rows, "x", cols));
  }
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor src = a.value();
  Mat out = Eigen::Map<RowMajor>(src.data(), rows, cols);
  int ia = a.id();
  const Index ar = a.rows(), ac = a.cols();
  return a.tape().record(std::move(out), [ia, ar, ac](Tape& t, int self) {
    RowMajor g = t.grad_of(self);
    t.grad_of(ia) += Mat(Eigen::Map<RowMajor>(g.data(), ar, ac));
  });
}

Var matmul_const(const Mat& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError(concat("matmul ", a.rows(), "x", a.cols(), " by ", b.rows(), "x", b.cols()));
  }
  int ib = b.id();
  return b.tape().record(a * b.value(), [ib, a](Tape& t, int self) {
    t.grad_of(ib).noalias() += a.transpose() * t.grad_of(self);
  });
}

Var matmul_sparse(const SparseMat& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError(concat("matmul ", a.rows(), "x", a.cols(), " by ", b.rows(), "x", b.cols()));
  }
  int ib = b.id();
  Mat out = a * b.value();
  return b.tape().record(std::move(out), [ib, &a](Tape& t, int self) {
    t.grad_of(ib) += a.transpose() * t.grad_of(self);
  });
}

}  // namespace tomsc::nn
