#include "tomsc/agents/belief.hpp"

#include "tomsc/nn/prob.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace tomsc::agents {

Index Belief::argmax() const {
  Index best = 0;
  for (Index i = 1; i < weights.size(); ++i) {
    if (weights[i] > weights[best]) best = i;
  }
  return best;
}

Belief uniform_belief(Index hypotheses) {
  if (hypotheses < 1) fail("belief needs at least one hypothesis");
  return {Vec::Constant(hypotheses, 1.0 / static_cast<double>(hypotheses)), 0};
}

void require_belief(const Vec& weights, const char* what) { nn::require_distribution(weights, what); }

namespace {

Belief finish(const Belief& prior, Vec w, const BeliefOptions& options) {
  const double total = w.sum();
  w /= total;
  const auto h = static_cast<double>(w.size());
  if (options.floor > 0.0) {
    if (options.floor * h >= 1.0) fail("belief floor ", options.floor, " too large for ", w.size(), " hypotheses");
    // Raise entries to the floor and take the mass from the rest, proportionally.
    std::vector<bool> pinned(static_cast<std::size_t>(w.size()), false);
    for (bool changed = true; changed;) {
      changed = false;
      double free_mass = 0.0;
      double pinned_count = 0.0;
      for (Index i = 0; i < w.size(); ++i) {
        if (pinned[static_cast<std::size_t>(i)]) {
          pinned_count += 1.0;
        } else {
          free_mass += w[i];
        }
      }
      const double scale = (1.0 - options.floor * pinned_count) / free_mass;
      for (Index i = 0; i < w.size(); ++i) {
        if (pinned[static_cast<std::size_t>(i)]) continue;
        w[i] *= scale;
        if (w[i] < options.floor) {
          w[i] = options.floor;
          pinned[static_cast<std::size_t>(i)] = true;
          changed = true;
        }
      }
    }
  }
  return {w, prior.step + 1};
}

}  // namespace

Belief update_belief(const Belief& prior, const Vec& likelihoods, const BeliefOptions& options) {
  require_belief(prior.weights, "prior belief");
  if (likelihoods.size() != prior.size()) {
    throw DimensionError(concat("update_belief: ", likelihoods.size(), " likelihoods for ", prior.size(),
                                " hypotheses"));
  }
  if (!likelihoods.allFinite() || (likelihoods.array() < 0.0).any()) {
    fail("update_belief: likelihoods must be finite and nonnegative");
  }
  Vec w = likelihoods.cwiseProduct(prior.weights);
  if (!(w.sum() > 0.0)) fail("belief collapse: every hypothesis has zero likelihood");
  return finish(prior, std::move(w), options);
}

Belief update_belief_log(const Belief& prior, const Vec& log_likelihoods, const BeliefOptions& options) {
  require_belief(prior.weights, "prior belief");
  if (log_likelihoods.size() != prior.size()) {
    throw DimensionError(concat("update_belief: ", log_likelihoods.size(), " likelihoods for ", prior.size(),
                                " hypotheses"));
  }
  Vec logw(prior.size());
  double top = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < prior.size(); ++i) {
    if (std::isnan(log_likelihoods[i]) || log_likelihoods[i] == std::numeric_limits<double>::infinity()) {
      fail("update_belief: invalid log-likelihood at hypothesis ", i);
    }
    logw[i] = log_likelihoods[i] + std::log(prior.weights[i]);
    top = std::max(top, logw[i]);
  }
  if (!std::isfinite(top)) fail("belief collapse: every hypothesis has zero likelihood");
  Vec w = (logw.array() - top).exp();
  return finish(prior, std::move(w), options);
}

Vec transmitter_policy(const Mat& q, const Vec& belief, double beta) {
  if (q.rows() < 1) fail("transmitter_policy: empty candidate set");
  if (q.cols() != belief.size()) {
    throw DimensionError(concat("transmitter_policy: q has ", q.cols(), " hypothesis columns, belief has ",
                                belief.size()));
  }
  if (!(beta > 0.0)) fail("transmitter_policy: beta must be positive, got ", beta);
  require_belief(belief, "transmitter belief");
  Vec value = q * belief;
  return nn::softmax(value * beta);
}

Index encode_semantic(const Vec& policy, SelectMode mode, Rng* rng) {
  nn::require_distribution(policy, "symbol policy");
  if (mode == SelectMode::greedy) {
    Index best = 0;
    for (Index i = 1; i < policy.size(); ++i) {
      if (policy[i] > policy[best]) best = i;
    }
    return best;
  }
  if (rng == nullptr) fail("encode_semantic: sampling needs a generator");
  const double u = uniform01(*rng);
  double acc = 0.0;
  for (Index i = 0; i < policy.size(); ++i) {
    acc += policy[i];
    if (u < acc) return i;
  }
  for (Index i = policy.size() - 1; i > 0; --i) {
    if (policy[i] > 0.0) return i;
  }
  return 0;
}

BeliefTracker::BeliefTracker(const std::string& name, Index input, Index hidden, Index hypotheses, Rng& rng)
    : gru_(name + ".gru", input, hidden, rng),
      head_(name + ".head", hidden, hypotheses, nn::Activation::identity, nn::Init::zero, rng) {}

Vec BeliefTracker::step(const Vec& input, Vec& hidden) const {
  hidden = gru_.apply(input, hidden);
  return predict(hidden);
}

Vec BeliefTracker::predict(const Vec& hidden) const { return nn::softmax(head_.apply(hidden)); }

nn::Var BeliefTracker::forward(nn::Tape& tape, const nn::Var& input, const nn::Var& hidden) {
  nn::Var h = gru_.forward(tape, input, hidden);
  return nn::log_softmax_rows(head_.forward(tape, h));
}

nn::ParameterList BeliefTracker::parameters() {
  nn::ParameterList out = gru_.parameters();
  for (auto* p : head_.parameters()) out.push_back(p);
  return out;
}

}  // namespace tomsc::agents
