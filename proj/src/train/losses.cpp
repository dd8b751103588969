#include "tomsc/train/losses.hpp"

#include <cmath>

namespace tomsc::train {

double q_target(double reward, double max_next, double gamma, bool terminal) {
  if (gamma < 0.0 || gamma >= 1.0) fail("q_target: gamma must lie in [0, 1), got ", gamma);
  if (!std::isfinite(reward)) fail("q_target: non-finite reward");
  return terminal ? reward : reward + gamma * max_next;
}

nn::Var loss_q(const nn::Var& q, const Vec& targets) {
  if (q.rows() == 0) fail("loss_q: empty batch");
  if (q.cols() != 1 || q.rows() != targets.size()) {
    throw DimensionError(concat("loss_q: ", q.rows(), "x", q.cols(), " predictions for ", targets.size(), " targets"));
  }
  nn::Tape& tape = q.tape();
  return nn::mean(nn::square(q - tape.constant_col(targets)));
}

nn::Var loss_partner_policy(const nn::Var& log_probs, const std::vector<int>& actions) {
  if (log_probs.rows() == 0) fail("loss_partner_policy: empty batch");
  if (static_cast<std::size_t>(log_probs.rows()) != actions.size()) {
    throw DimensionError(concat("loss_partner_policy: ", log_probs.rows(), " rows for ", actions.size(), " actions"));
  }
  Mat pick = Mat::Zero(log_probs.rows(), log_probs.cols());
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i] < 0 || actions[i] >= log_probs.cols()) fail("loss_partner_policy: action ", actions[i], " out of range");
    pick(static_cast<Index>(i), actions[i]) = 1.0;
  }
  nn::Tape& tape = log_probs.tape();
  return nn::scale(nn::sum(tape.constant(pick) * log_probs), -1.0 / static_cast<double>(actions.size()));
}

double partner_policy_nll(const Mat& probs, const std::vector<int>& actions, long* clamped) {
  if (probs.rows() == 0) fail("partner_policy_nll: empty batch");
  if (static_cast<std::size_t>(probs.rows()) != actions.size()) {
    throw DimensionError(concat("partner_policy_nll: ", probs.rows(), " rows for ", actions.size(), " actions"));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    double p = probs(static_cast<Index>(i), actions[i]);
    if (p < 1e-12) {
      p = 1e-12;
      if (clamped != nullptr) ++*clamped;
    }
    total -= std::log(p);
  }
  return total / static_cast<double>(actions.size());
}

nn::Var loss_belief(const nn::Var& log_predicted, const Mat& targets) {
  if (log_predicted.rows() == 0) fail("loss_belief: empty batch");
  if (log_predicted.rows() != targets.rows() || log_predicted.cols() != targets.cols()) {
    throw DimensionError(concat("loss_belief: prediction ", log_predicted.rows(), "x", log_predicted.cols(),
                                " vs target ", targets.rows(), "x", targets.cols()));
  }
  double entropy_part = 0.0;
  for (Index i = 0; i < targets.rows(); ++i)
    for (Index j = 0; j < targets.cols(); ++j) {
      if (targets(i, j) > 0.0) entropy_part += targets(i, j) * std::log(targets(i, j));
    }
  const double rows = static_cast<double>(targets.rows());
  nn::Tape& tape = log_predicted.tape();
  nn::Var cross = nn::scale(nn::sum(tape.constant(targets) * log_predicted), -1.0 / rows);
  return nn::add_scalar(cross, entropy_part / rows);
}

}  // namespace tomsc::train
