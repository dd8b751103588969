#pragma once

#include "tomsc/agents/belief.hpp"
#include "tomsc/agents/quantizer.hpp"
#include "tomsc/agents/world.hpp"
#include "tomsc/nn/checkpoint.hpp"

#include <vector>

namespace tomsc::agents {

struct AgentConfig {
  int anchors = 16;
  int q_hidden = 32;
  int partner_hidden = 16;
  int policy_hidden = 16;
  int tracker_hidden = 16;
  QuantizerConfig quantizer;
  BeliefOptions belief;
  double delta = 0.5;  ///< distortion scale for the Q features
  /// false freezes the belief at uniform and disables belief-of-belief tracking.
  bool tom = true;

  void validate() const;
};

/// Linear decoder trunk, N x 2N weights over [s_hat - dialect, previous z_hat].
struct DecoderWeights {
  Mat weights;
  Vec bias;
};

DecoderWeights identity_decoder(Index n);

/// Decoded state in N dims, zero outside `indices`. `s_hat` holds the
/// received values of `indices` in order; `previous` is the last decoded
/// N-dim state.
Vec decode_state(const DecoderWeights& decoder, const Vec& dialect, const std::vector<Index>& indices,
                 const Vec& s_hat, const Vec& previous);
/// The 2N trunk input for the same arguments.
Vec decoder_input(const Vec& dialect, const std::vector<Index>& indices, const Vec& s_hat, const Vec& previous);

/// Values of `indices` from an N-dim vector.
Vec gather(const Vec& full, const std::vector<Index>& indices);

/// One registered receiver hypothesis.
struct ReceiverSnapshot {
  ReceiverProfile profile;
  DecoderWeights decoder;
};

/// Inputs shared by every Q evaluation at one step.
struct QContext {
  Mat distortion;  ///< candidates x hypotheses, simulated E per candidate and hypothesis
  double d_prev = 1.0;
  double p_prev = 0.0;
  Vec tracked;     ///< belief-of-belief
  Vec belief;      ///< own belief over receivers
};

/// Per-component policy columns after the state value:
/// [parents / |A|, task one-hot, component one-hot].
Mat policy_aux(const World& world, int task);
Index policy_width(const World& world);

/// Q input rows for every (candidate, hypothesis) pair, candidate-major.
Mat q_features(const QContext& ctx, double delta);
/// The single Q input row for candidate j and hypothesis h.
Vec q_feature_row(const QContext& ctx, Index j, Index h, double delta);
/// Q values, candidates x hypotheses.
Mat q_values(const nn::Mlp& q, const QContext& ctx, double delta);

class ReceiverAgent {
 public:
  ReceiverAgent(const World& world, const AgentConfig& config, Rng& rng);

  const World& world() const { return *world_; }
  const AgentConfig& config() const { return config_; }
  const ReceiverProfile& profile() const { return profile_; }
  /// Switches the private state and resets beliefs and decoder memory.
  void set_profile(const ReceiverProfile& profile);
  void begin_episode();

  Vec decoder_input(const Vec& s_hat, const std::vector<Index>& indices) const;
  /// Decodes and remembers the result as the previous state.
  Vec decode(const Vec& s_hat, const std::vector<Index>& indices);
  const Vec& previous() const { return previous_; }

  /// Rows are retained components: [z_hat_c, policy_aux].
  Mat policy_features(const Vec& z_hat_full, int task) const;
  semantic::ActionDistribution policy(const Vec& z_hat_full) const;
  std::vector<int> act(const semantic::ActionDistribution& policy, Rng& rng) const;

  /// Estimated probability that an exchange succeeds when the transmitter
  /// targets hypothesis m.
  Vec partner_features(Index m, double cqi_db) const;
  double success_probability(Index m, double cqi_db) const;
  /// Bayes update of the belief over the transmitter's target from the
  /// observed outcome; then advances the belief-of-belief tracker. Returns
  /// the tracker input consumed (empty without ToM).
  Vec observe(bool success, const std::vector<int>& actions, double d, double cqi_db);
  Vec tracker_input(const std::vector<int>& actions, double d, double cqi_db) const;

  const Belief& belief() const { return belief_; }
  const Vec& tracked() const { return tracked_; }
  const Vec& tracker_hidden() const { return hidden_; }

  nn::DenseLayer& trunk() { return trunk_; }
  nn::Mlp& policy_net() { return policy_; }
  nn::Mlp& partner_net() { return partner_; }
  BeliefTracker& tracker() { return tracker_; }
  const nn::DenseLayer& trunk() const { return trunk_; }
  const nn::Mlp& policy_net() const { return policy_; }

  DecoderWeights decoder_weights() const;
  nn::ParameterList network_parameters();
  nn::ParameterList partner_parameters() { return partner_.parameters(); }
  nn::ParameterList tracker_parameters() { return tracker_.parameters(); }
  nn::ParameterList parameters();

  std::vector<ReceiverSnapshot> snapshot_library() const;

 private:
  const World* world_;
  AgentConfig config_;
  ReceiverProfile profile_;
  nn::DenseLayer trunk_;
  nn::Mlp policy_;
  nn::Mlp partner_;
  BeliefTracker tracker_;
  Vec previous_;
  Belief belief_;
  Vec tracked_;
  Vec hidden_;
};

/// Supervised warm start of the receiver policy on the action oracles with
/// an error-free identity decoder. Returns the final mean cross-entropy.
double pretrain_receiver_policy(ReceiverAgent& rx, int steps, double learning_rate, Rng& rng);

class TransmitterAgent {
 public:
  TransmitterAgent(const World& world, const AgentConfig& config, Rng& rng);

  const World& world() const { return *world_; }
  const AgentConfig& config() const { return config_; }
  bool tom() const { return config_.tom; }
  Index candidates() const { return codebook_.rows() + 1; }
  Index hypotheses() const { return static_cast<Index>(library_.size()); }

  /// Registers immutable receiver snapshots and refits the codebook anchors
  /// so anchor h compensates snapshot h; the remaining anchors average
  /// pairs of them.
  void register_library(std::vector<ReceiverSnapshot> library);
  const std::vector<ReceiverSnapshot>& library() const { return library_; }
  const Mat& codebook() const { return codebook_.value(); }

  /// Clipped retained-space symbol for candidate j (the last one is z itself).
  Vec candidate(const Vec& z, Index j) const;

  void reset_partner();
  void begin_episode(double cqi_db);

  struct Plan {
    QContext context;
    Mat q;          ///< candidates x hypotheses
    Vec policy;
    int bits = 0;   ///< bits per dimension chosen from the last CQI
    std::vector<Mat> simulated;  ///< per candidate: hypotheses x N simulated decodes
    std::vector<Vec> symbols;    ///< per candidate: quantized-then-dequantized symbol
  };
  Plan plan(const Vec& z, double beta) const;
  Plan plan(const Vec& z, double beta, const nn::Mlp& q) const;

  /// Per-component partner-policy inputs for a simulated decode.
  Mat partner_features(const Vec& decoded_full, int task, double cqi_db) const;
  /// log pi_r(actions | symbol, hypothesis h) for each h.
  Vec action_log_likelihoods(const Plan& plan, Index j, const std::vector<int>& actions, double cqi_db) const;
  /// Absorbs the outcome of sending candidate j: Bayes belief update from
  /// the observed actions, belief-of-belief step and feedback context.
  /// Returns the tracker input consumed (empty without ToM).
  Vec observe(const Plan& plan, Index j, const std::vector<int>& actions, double d, double cqi_db);
  Vec tracker_input(Index j, double d, double cqi_db) const;

  const Belief& belief() const { return belief_; }
  const Vec& tracked() const { return tracked_; }
  const Vec& tracker_hidden() const { return hidden_; }
  double d_prev() const { return d_prev_; }
  double p_prev() const { return p_prev_; }

  nn::Mlp& q_net() { return q_; }
  nn::Mlp& q_target() { return q_target_; }
  const nn::Mlp& q_net() const { return q_; }
  const nn::Mlp& q_target() const { return q_target_; }
  nn::Mlp& partner_net() { return partner_; }
  BeliefTracker& tracker() { return tracker_; }
  void sync_target();

  nn::ParameterList q_parameters() { return q_.parameters(); }
  nn::ParameterList partner_parameters() { return partner_.parameters(); }
  nn::ParameterList tracker_parameters() { return tracker_.parameters(); }
  nn::ParameterList parameters();

  nn::Checkpoint checkpoint();
  void restore(const nn::Checkpoint& ck);

 private:
  const World* world_;
  AgentConfig config_;
  std::vector<ReceiverSnapshot> library_;
  nn::Parameter codebook_;
  nn::Mlp q_;
  nn::Mlp q_target_;
  nn::Mlp partner_;
  BeliefTracker tracker_;
  Belief belief_;
  Vec tracked_;
  Vec hidden_;
  std::vector<Vec> simulated_previous_;
  double d_prev_ = 1.0;
  double p_prev_ = 0.0;
};

}  // namespace tomsc::agents
