#pragma once

#include "tomsc/nn/layers.hpp"

#include <vector>

namespace tomsc::agents {

/// Posterior over a finite hypothesis library.
struct Belief {
  Vec weights;
  long step = 0;  ///< number of updates absorbed

  Index size() const { return weights.size(); }
  Index argmax() const;
};

Belief uniform_belief(Index hypotheses);
void require_belief(const Vec& weights, const char* what);

struct BeliefOptions {
  /// Every weight stays at least this large; 0 gives the plain Bayes rule.
  double floor = 1e-3;
};

/// b'(i) proportional to likelihood(i) * b(i), then floored.
Belief update_belief(const Belief& prior, const Vec& likelihoods, const BeliefOptions& options = {});
/// Same update from log-likelihoods; numerically safe for long products.
Belief update_belief_log(const Belief& prior, const Vec& log_likelihoods, const BeliefOptions& options = {});

/// softmax over candidates of beta * sum_h b(h) q(j, h); q is candidates x hypotheses.
Vec transmitter_policy(const Mat& q, const Vec& belief, double beta);

enum class SelectMode { greedy, sample };

/// Greedy picks the most probable candidate (lowest index on ties).
Index encode_semantic(const Vec& policy, SelectMode mode, Rng* rng = nullptr);

/// Recurrent belief-of-belief estimator: a GRU over observation features
/// followed by a softmax head over the partner's hypothesis library.
class BeliefTracker {
 public:
  BeliefTracker() = default;
  BeliefTracker(const std::string& name, Index input, Index hidden, Index hypotheses, Rng& rng);

  Index input_dim() const { return gru_.input_dim(); }
  Index hidden_dim() const { return gru_.hidden_dim(); }
  Index hypotheses() const { return head_.out_dim(); }

  /// Advances the hidden state and returns the predicted partner belief.
  Vec step(const Vec& input, Vec& hidden) const;
  Vec predict(const Vec& hidden) const;
  /// Batch form on the tape; returns log-probabilities (batch x hypotheses).
  nn::Var forward(nn::Tape& tape, const nn::Var& input, const nn::Var& hidden);

  nn::ParameterList parameters();

 private:
  nn::GruCell gru_;
  nn::DenseLayer head_;
};

}  // namespace tomsc::agents
