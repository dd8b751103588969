#pragma once

#include "tomsc/agents/agents.hpp"
#include "tomsc/baselines/transport.hpp"

#include <vector>

namespace tomsc::train {

/// Everything observed and computed during one transmission.
struct StepLog {
  long step = 0;
  int profile = 0;
  int task = 0;
  Index candidate = 0;
  int bits_per_dim = 0;
  long bits_sent = 0;
  long payload_bits = 0;
  long channel_uses = 0;
  double cqi_used = 0.0;   ///< CQI the rate was chosen from
  double cqi = 0.0;        ///< CQI measured on this frame
  double c_t = 0.0;
  double d = 1.0;
  double e_t = 0.0;
  double reward = 0.0;
  bool success = false;
  std::vector<int> actions;

  agents::QContext context;
  Vec decoded_true;         ///< transmitter's simulated decode under the true hypothesis (N)
  Vec tx_tracker_input;
  Vec tx_tracker_hidden;    ///< hidden state before the step
  Vec rx_belief;            ///< receiver belief after the step (f_r target)
  Vec decoder_input;        ///< receiver trunk input (2N)
  Vec truth;                ///< true causal state embedded in N dims
  Mat ideal;                ///< k x |A|
  Index target = 0;         ///< transmitter's most likely receiver before the step
  double rx_cqi = 0.0;
  Vec rx_tracker_input;
  Vec rx_tracker_hidden;
  Vec tx_belief;            ///< transmitter belief after the step (f_s target)
};

struct Trajectory {
  double snr_db = 0.0;
  int profile = 0;
  std::vector<StepLog> steps;
};

struct StepSettings {
  double beta = 1.0;
  agents::SelectMode mode = agents::SelectMode::sample;
  double c_len = 0.01;
  semantic::ReliabilityConfig reliability;
};

/// Transmitter-to-receiver exchange for one observation: policy, encoding,
/// quantization, transport, decoding, action, feedback and belief updates.
StepLog run_step(agents::TransmitterAgent& tx, agents::ReceiverAgent& rx, const baselines::Transport& transport,
                 const Vec& observation, const StepSettings& settings, Rng& rng);

/// Non-semantic exchange: all N variables quantized at the CQI-selected rate
/// without a codebook offset or semantic feedback; the receiver's decode is
/// restricted to the retained variables before acting.
StepLog run_classical_step(agents::ReceiverAgent& rx, const baselines::Transport& transport, const Vec& observation,
                           double& cqi_state, const agents::QuantizerConfig& quantizer, const StepSettings& settings,
                           Rng& rng);

/// T steps from consecutive stream rows starting at `start` (wrapping).
Trajectory collect_episode(agents::TransmitterAgent& tx, agents::ReceiverAgent& rx, phy::Link& link,
                           const Mat& stream, Index start, int horizon, const StepSettings& settings, Rng& rng);

semantic::MetricRecord to_record(const StepLog& s, long episode, double snr_db);

}  // namespace tomsc::train
