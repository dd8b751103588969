#pragma once

#include "tomsc/train/episode.hpp"

#include <vector>

namespace tomsc::train {

/// Streaming run with a task switch and online Q updates, frozen otherwise.
struct AdaptationConfig {
  int samples = 6000;
  int switch_at = 3000;
  int window = 100;
  int horizon = 16;
  double snr_db = 10.0;
  double beta = 5.0;
  double learning_rate = 1e-2;
  double gamma = 0.5;
  double c_len = 0.01;
  semantic::ReliabilityConfig reliability;
  std::uint64_t scenario_seed = 0;

  void validate() const;
};

struct AdaptationTrace {
  std::vector<double> window_d;  ///< mean d per window
  int switch_window = 0;
  int pre_receiver = 0;
  int post_receiver = 0;
};

/// One SGD step on (sum_h b_h Q(j, h) - target)^2 with b the decision-time belief.
double online_q_update(agents::TransmitterAgent& tx, const agents::QContext& context, Index candidate, double target,
                       double learning_rate);

/// Agents are copied; the task-0 receiver is replaced by a task-1 receiver at switch_at.
AdaptationTrace run_adaptation(const agents::TransmitterAgent& tx, const agents::ReceiverAgent& rx,
                               const AdaptationConfig& config, Rng& rng);

/// Windows after the switch until a window reaches fraction x the mean of the
/// `baseline` windows before it; -1 when it never does.
int recovery_windows(const std::vector<double>& window_d, int switch_window, int baseline = 10,
                     double fraction = 0.9);

}  // namespace tomsc::train
