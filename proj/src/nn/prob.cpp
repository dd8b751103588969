#include "tomsc/nn/prob.hpp"

#include <cmath>

namespace tomsc::nn {

namespace {

void require_finite_logits(const Vec& logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) fail("softmax temperature must be positive, got ", temperature);
  for (Index i = 0; i < logits.size(); ++i) {
    if (!std::isfinite(logits[i])) fail("softmax: non-finite logit at index ", i);
  }
  if (logits.size() == 0) fail("softmax: empty logits");
}

}  // namespace

Vec log_softmax(const Vec& logits, double temperature) {
  require_finite_logits(logits, temperature);
  Vec z = logits / temperature;
  z.array() -= z.maxCoeff();
  const double lse = std::log(z.array().exp().sum());
  return z.array() - lse;
}

Vec softmax(const Vec& logits, double temperature) {
  require_finite_logits(logits, temperature);
  Vec z = logits / temperature;
  z.array() -= z.maxCoeff();
  Vec e = z.array().exp();
  return e / e.sum();
}

void require_distribution(const Vec& p, const char* what, double tol) {
  if (p.size() == 0) fail(what, ": empty distribution");
  for (Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < -tol) fail(what, ": invalid probability ", p[i], " at index ", i);
  }
  const double s = p.sum();
  if (std::abs(s - 1.0) > tol) fail(what, ": probabilities sum to ", s, ", not 1");
}

double kld(const Vec& p_in, const Vec& q_in, const KldOptions& options) {
  if (p_in.size() != q_in.size()) {
    throw DimensionError(concat("kld: p has ", p_in.size(), " entries but q has ", q_in.size()));
  }
  require_distribution(p_in, "kld p", options.normalization_tol);
  require_distribution(q_in, "kld q", options.normalization_tol);
  Vec p = p_in;
  Vec q = q_in;
  if (options.smoothing > 0.0) {
    const double u = 1.0 / static_cast<double>(p.size());
    p = (1.0 - options.smoothing) * p.array() + options.smoothing * u;
    q = (1.0 - options.smoothing) * q.array() + options.smoothing * u;
  }
  double total = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) fail("kld: q has zero mass at index ", i, " where p = ", p[i]);
    total += p[i] * (std::log(p[i]) - std::log(q[i]));
  }
  return total < 0.0 ? 0.0 : total;
}

double entropy(const Vec& p) {
  double h = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

double cross_entropy(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) throw DimensionError(concat("cross_entropy: ", p.size(), " vs ", q.size()));
  double h = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) fail("cross_entropy: q has zero mass at index ", i);
    h -= p[i] * std::log(q[i]);
  }
  return h;
}

}  // namespace tomsc::nn
