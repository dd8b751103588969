#pragma once

#include "tomsc/agents/objective.hpp"
#include "tomsc/nn/optim.hpp"
#include "tomsc/train/episode.hpp"
#include "tomsc/train/replay.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tomsc::train {

struct TrainConfig {
  double eta_q = 1e-3;
  double eta_pi = 1e-3;
  double eta_f = 1e-3;
  /// Weight of the receiver Lagrangian; unset means eta_q.
  std::optional<double> eta_p2;
  /// Optimizer applied to eta-weighted total loss with this step size;
  /// plain SGD with step 1 is the textbook update theta -= eta * grad.
  nn::OptimizerKind optimizer = nn::OptimizerKind::sgd;
  double step_size = 1.0;
  /// Step size for receiver rounds; unset means step_size.
  std::optional<double> receiver_step_size;
  double clip = 0.0;
  int batch = 32;
  int horizon = 16;
  double gamma = 0.9;
  double beta_start = 0.5;
  double beta_end = 5.0;
  int rounds = 200;
  int sync_period = 10;
  int capacity = 512;
  bool persistent_buffer = false;
  int updates_per_round = 1;
  std::vector<double> snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  double c_len = 0.01;
  agents::P2Config p2;
  int checkpoint_every = 0;
  std::filesystem::path checkpoint_dir;

  void validate() const;
  double beta(int round) const;
  double receiver_eta() const { return eta_p2.value_or(eta_q); }
  double receiver_step() const { return receiver_step_size.value_or(step_size); }
};

struct LossReport {
  int round = 0;
  std::string agent;  ///< "tx" or "rx"
  double l_q = 0.0;   ///< Q loss for tx rounds, receiver Lagrangian for rx rounds
  double l_pi = 0.0;
  double l_f = 0.0;
  double total = 0.0;
  double mean_d = 0.0;
  double mean_ct = 0.0;
};

struct RoundLosses {
  nn::Var q;
  nn::Var pi;  ///< invalid when excluded
  nn::Var f;   ///< invalid when excluded
  nn::Var total;
};

/// Transmitter losses on a batch; partner and belief terms only with ToM.
RoundLosses transmitter_losses(nn::Tape& tape, agents::TransmitterAgent& tx, const std::vector<const Trajectory*>& batch,
                               const TrainConfig& config);
/// Receiver losses: the Lagrangian takes the place of the Q loss.
RoundLosses receiver_losses(nn::Tape& tape, agents::ReceiverAgent& rx, const std::vector<const Trajectory*>& batch,
                            const TrainConfig& config);

/// Centralized alternating training of both agents.
std::vector<LossReport> train(agents::TransmitterAgent& tx, agents::ReceiverAgent& rx, const TrainConfig& config,
                              Rng& rng);

/// Draws a random partner and SNR and collects one training episode.
Trajectory collect_training_episode(agents::TransmitterAgent& tx, agents::ReceiverAgent& rx, const TrainConfig& config,
                                    double beta, Rng& rng);

const char* loss_csv_header();
void write_loss_csv(const std::vector<LossReport>& reports, const std::filesystem::path& path);

}  // namespace tomsc::train
