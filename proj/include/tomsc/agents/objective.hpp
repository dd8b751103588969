#pragma once

#include "tomsc/nn/tape.hpp"
#include "tomsc/semantic/metrics.hpp"

namespace tomsc::agents {

struct P2Config {
  double lambda = 1.0;
  semantic::ReliabilityConfig reliability;
  /// Sigmoid width of the smoothed reliability indicator; delta / 10.
  double kappa() const { return reliability.delta / 10.0; }
  void validate() const;
};

/// Receiver Lagrangian:
///   mean_rows(-sum_a ideal * log pi) + lambda * ((1 - eps) - mean sigmoid((delta - E) / kappa)).
/// log_policy and ideal are rows x |A|; distortion is m x 1.
nn::Var receiver_objective(const nn::Var& log_policy, const Mat& ideal, const nn::Var& distortion,
                           const P2Config& config);
/// Tape-free evaluation with probabilities.
double receiver_objective(const Mat& policy, const Mat& ideal, const Vec& distortion, const P2Config& config);

}  // namespace tomsc::agents
