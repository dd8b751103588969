#pragma once

#include "tomsc/common.hpp"

namespace tomsc::nn {

/// Numerically stable softmax of logits / temperature.
Vec softmax(const Vec& logits, double temperature = 1.0);
Vec log_softmax(const Vec& logits, double temperature = 1.0);

struct KldOptions {
  /// When > 0, both arguments are mixed with the uniform distribution at this
  /// weight before the divergence, so empty q support is tolerated.
  double smoothing = 0.0;
  double normalization_tol = 1e-9;
};

/// KL(p || q) in nats. Throws when q has zero mass where p does not.
double kld(const Vec& p, const Vec& q, const KldOptions& options = {});

/// Shannon entropy in nats.
double entropy(const Vec& p);
/// -sum p log q, with the same support rule as kld.
double cross_entropy(const Vec& p, const Vec& q);

void require_distribution(const Vec& p, const char* what, double tol = 1e-9);

}  // namespace tomsc::nn
