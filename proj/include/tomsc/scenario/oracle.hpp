#pragma once

#include "tomsc/common.hpp"

#include <string>
#include <vector>

namespace tomsc::scenario {

enum class SwitchMode { scale_up, scale_down, permute_labels };

SwitchMode parse_switch_mode(const std::string& name);
std::string to_string(SwitchMode m);

/// Receiver-action oracle: per-component truncated discrete Gaussian over
/// {0..|A|-1} with mean alpha * parents + value_coupling * value.
struct ActionOracle {
  int alphabet = 5;
  double alpha = 1.0;
  double sigma = 0.7;
  double value_coupling = 0.0;
  int task_id = 0;
  /// label[a] is the reported label of latent action a.
  std::vector<int> labels;

  ActionOracle() = default;
  ActionOracle(int alphabet, double alpha, double sigma, double value_coupling = 0.0);

  double mean(int parents, double value) const;
  /// Distribution over action labels for one component.
  Vec component(int parents, double value) const;
  /// One distribution per component of z.
  std::vector<Vec> distribution(const std::vector<int>& parents, const Vec& values) const;
  void validate() const;
};

/// Returns a perturbed copy with task_id + 1.
ActionOracle switch_task(const ActionOracle& oracle, SwitchMode mode);

/// Discretized Gaussian over {0..A-1} centered at `mean`, renormalized.
Vec truncated_discrete_gaussian(int alphabet, double mean, double sigma);

double total_variation(const Vec& p, const Vec& q);

}  // namespace tomsc::scenario
