#pragma once

#include "tomsc/nn/tape.hpp"

#include <vector>

namespace tomsc::train {

/// y = r for terminal steps, otherwise r + gamma * max_next.
double q_target(double reward, double max_next, double gamma, bool terminal);

/// Mean squared error between predicted Q (batch x 1) and targets.
nn::Var loss_q(const nn::Var& q, const Vec& targets);

/// Mean negative log-likelihood of observed actions under log-probabilities
/// (rows x |A|), one action per row.
nn::Var loss_partner_policy(const nn::Var& log_probs, const std::vector<int>& actions);
/// Same from probabilities; zeros are clamped to 1e-12 and counted.
double partner_policy_nll(const Mat& probs, const std::vector<int>& actions, long* clamped = nullptr);

/// Mean over rows of KL(target || predicted); `log_predicted` holds log-probabilities.
nn::Var loss_belief(const nn::Var& log_predicted, const Mat& targets);

}  // namespace tomsc::train
