#pragma once

#include "tomsc/nn/layers.hpp"
#include "tomsc/nn/optim.hpp"
#include "tomsc/scenario/scm.hpp"

#include <filesystem>
#include <vector>

namespace tomsc::causal {

struct DiscoveryConfig {
  int edge_types = 2;
  int hidden = 16;
  int epochs = 300;
  double learning_rate = 0.01;
  nn::OptimizerKind optimizer = nn::OptimizerKind::adam;
  double tau_start = 2.0;
  double tau_end = 0.5;
  double no_edge_prior = 0.9;
  double sigma2 = 0.1;
  bool learn_sigma2 = false;
  double threshold = 0.5;
  double holdout_fraction = 0.2;
  double ridge = 1e-3;
};

/// Edge posterior and hard adjacency. probs[e](i, j) is the posterior of edge
/// type e for i -> j; type 0 is "no edge".
struct CausalGraph {
  Index n = 0;
  std::vector<Mat> probs;
  scenario::Adjacency adjacency;

  /// Posterior that some edge i -> j exists.
  Mat edge_probability() const { return Mat::Ones(n, n) - probs.at(0); }
  std::vector<int> parent_counts() const;
  std::vector<Index> connected() const;
};

/// Hard graph from a posterior: edge iff no-edge posterior < threshold.
CausalGraph threshold_graph(std::vector<Mat> probs, double threshold);

/// Transmitted causal state: values of variables with at least one incident
/// edge, in index order.
struct CausalState {
  std::vector<Index> retained;
  Vec values;
  std::vector<int> parents;  ///< parent count of each retained variable
  Index dimension() const { return static_cast<Index>(retained.size()); }
};

CausalState extract_state(const CausalGraph& graph, const Vec& observation);

/// Gumbel-softmax relaxation of each row of `logits`.
Mat sample_edges(const Mat& logits, double temperature, Rng& rng);
Mat gumbel_noise(Index rows, Index cols, Rng& rng);

struct ElboParts {
  double log_likelihood = 0.0;
  double kl = 0.0;
  double value() const { return log_likelihood - kl; }
};

/// GNN edge encoder plus per-pair message decoder.
class DiscoveryModel {
 public:
  DiscoveryModel() = default;
  DiscoveryModel(Index n, const DiscoveryConfig& config, Rng& rng);

  Index n() const { return n_; }
  const DiscoveryConfig& config() const { return config_; }
  int feature_dim() const;

  /// Per-variable affine standardization applied before everything else.
  void set_scaler(Vec mean, Vec scale);
  Mat standardize(const Mat& sample) const;
  const Vec& scaler_mean() const { return mean_; }
  const Vec& scaler_scale() const { return scale_; }

  /// Pair summary features of a standardized sample, rows ordered i * N + j.
  Mat pair_features(const Mat& standardized) const;

  /// Edge logits for a raw sample; rows ordered i * N + j, diagonal masked.
  Mat encode_graph(const Mat& sample);
  /// Tape encoder over stacked pair features of several samples.
  nn::Var encode(nn::Tape& tape, const Mat& stacked_features, Index samples);

  /// Relaxed edges z (N*N x E rows) -> mean of o^{t+1} given o^t (one row).
  Vec decode_step(const Vec& o, const Mat& edges);
  /// Decoder over a standardized sample on the tape; returns (T-1) x N means.
  nn::Var decode(nn::Tape& tape, const Mat& standardized, const nn::Var& edges);

  /// Negative ELBO averaged over samples. `noise` holds one Gumbel matrix per
  /// sample; when empty the posterior probabilities are used directly.
  nn::Var negative_elbo(nn::Tape& tape, const std::vector<Mat>& standardized, const std::vector<Mat>& noise,
                        double temperature, ElboParts* parts = nullptr);

  /// Mean ELBO per sample with expected edges (no sampling).
  ElboParts evaluate_elbo(const std::vector<Mat>& samples);
  /// ELBO of one standardized sample for a given edge posterior.
  ElboParts elbo(const Mat& standardized, const Mat& edge_posterior, const Vec& prior);

  /// Mean edge posterior over samples, thresholded.
  CausalGraph infer_graph(const std::vector<Mat>& samples);

  nn::ParameterList parameters();
  nn::ParameterList encoder_parameters();
  nn::ParameterList decoder_parameters();
  double sigma2() const;
  Vec prior() const;

 private:
  const nn::SparseMat& aggregation(Index samples, int which);
  Mat diagonal_mask(Index samples) const;

  Index n_ = 0;
  DiscoveryConfig config_;
  Vec mean_;
  Vec scale_;
  nn::Mlp edge_in_;
  nn::Mlp edge_out_;
  std::vector<nn::Parameter> msg_src_;  // per edge type e >= 1, N x N
  std::vector<nn::Parameter> msg_bias_;
  nn::Parameter node_msg_;   // 1 x N
  nn::Parameter node_self_;  // 1 x N
  nn::Parameter node_bias_;  // 1 x N
  nn::Parameter log_sigma2_;
  Index cached_samples_ = -1;
  nn::SparseMat gather_in_, gather_out_, spread_in_, spread_out_;
};

struct DiscoveryResult {
  DiscoveryModel model;
  CausalGraph graph;
  double heldout_elbo_before = 0.0;
  double heldout_elbo_after = 0.0;
  std::vector<double> loss_history;
};

DiscoveryResult train_discovery(const scenario::Dataset& data, const DiscoveryConfig& config, Rng& rng);

/// Area under the ROC curve with ties given half credit.
double auroc(const std::vector<double>& scores, const std::vector<bool>& labels);

struct RecoveryScore {
  double accuracy = 0.0;
  double auroc = 0.0;
};

/// Scores off-diagonal pairs of `graph` against the ground-truth adjacency.
RecoveryScore score_recovery(const CausalGraph& graph, const scenario::Adjacency& truth);

/// Text edge list `from,to,posterior` over all off-diagonal pairs.
void write_edge_list(const CausalGraph& graph, const std::filesystem::path& path);

}  // namespace tomsc::causal
