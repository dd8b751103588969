#include "tomsc/scenario/oracle.hpp"

#include <cmath>
#include <numeric>

namespace tomsc::scenario {

SwitchMode parse_switch_mode(const std::string& name) {
  if (name == "scale_up") return SwitchMode::scale_up;
  if (name == "scale_down") return SwitchMode::scale_down;
  if (name == "permute_labels") return SwitchMode::permute_labels;
  fail("unknown task switch mode '", name, "'");
}

std::string to_string(SwitchMode m) {
  switch (m) {
    case SwitchMode::scale_up: return "scale_up";
    case SwitchMode::scale_down: return "scale_down";
    case SwitchMode::permute_labels: return "permute_labels";
  }
  return "scale_up";
}

ActionOracle::ActionOracle(int alphabet_, double alpha_, double sigma_, double value_coupling_)
    : alphabet(alphabet_), alpha(alpha_), sigma(sigma_), value_coupling(value_coupling_) {
  labels.resize(static_cast<std::size_t>(alphabet));
  std::iota(labels.begin(), labels.end(), 0);
  validate();
}

void ActionOracle::validate() const {
  if (alphabet < 2) fail("action alphabet must have at least 2 actions, got ", alphabet);
  if (!(sigma > 0.0)) fail("action oracle sigma must be positive, got ", sigma);
  if (static_cast<int>(labels.size()) != alphabet) fail("action oracle label map has wrong size");
}

Vec truncated_discrete_gaussian(int alphabet, double mean, double sigma) {
  Vec logits(alphabet);
  for (int a = 0; a < alphabet; ++a) logits[a] = -0.5 * std::pow((a - mean) / sigma, 2);
  logits.array() -= logits.maxCoeff();
  Vec p = logits.array().exp();
  return p / p.sum();
}

double ActionOracle::mean(int parents, double value) const { return alpha * parents + value_coupling * value; }

Vec ActionOracle::component(int parents, double value) const {
  Vec latent = truncated_discrete_gaussian(alphabet, mean(parents, value), sigma);
  Vec out = Vec::Zero(alphabet);
  for (int a = 0; a < alphabet; ++a) out[labels[static_cast<std::size_t>(a)]] = latent[a];
  return out;
}

std::vector<Vec> ActionOracle::distribution(const std::vector<int>& parents, const Vec& values) const {
  if (static_cast<Index>(parents.size()) != values.size()) {
    throw DimensionError(concat("action oracle: ", parents.size(), " parent counts for ", values.size(), " values"));
  }
  std::vector<Vec> out;
  out.reserve(parents.size());
  for (std::size_t i = 0; i < parents.size(); ++i) out.push_back(component(parents[i], values[static_cast<Index>(i)]));
  return out;
}

ActionOracle switch_task(const ActionOracle& oracle, SwitchMode mode) {
  ActionOracle next = oracle;
  switch (mode) {
    case SwitchMode::scale_up: next.alpha *= 2.0; break;
    case SwitchMode::scale_down: next.alpha /= 2.0; break;
    case SwitchMode::permute_labels:
      for (auto& l : next.labels) l = oracle.alphabet - 1 - l;
      break;
  }
  next.task_id = oracle.task_id + 1;
  return next;
}

double total_variation(const Vec& p, const Vec& q) {
  if (p.size() != q.size()) throw DimensionError(concat("total_variation: ", p.size(), " vs ", q.size()));
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace tomsc::scenario
