#pragma once

#include "tomsc/exp/manifest.hpp"
#include "tomsc/exp/pairs.hpp"

#include <string>
#include <vector>

namespace tomsc::exp {

struct CellResult {
  std::string scheme;
  double snr_db = 0.0;
  int seed = 0;
  double spectral_efficiency = 0.0;
  double reliability = 0.0;
  double mean_d = 0.0;
  long transmissions = 0;
  long channel_uses = 0;
};

struct SweepResult {
  std::vector<CellResult> cells;  ///< seed-major, then SNR, then scheme order
  RunManifest manifest;
};

struct AdaptationRow {
  int seed = 0;
  std::string scheme;
  std::vector<double> window_d;
  int switch_window = 0;
  int recovery = -1;  ///< -1 when the trace never recovers
};

struct AdaptationResult {
  std::vector<AdaptationRow> rows;  ///< seed-major, tom before no_tom
  RunManifest manifest;
};

struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;
  int n = 0;
};
Summary summarize(const std::vector<double>& values);

/// Metric records for one scheme on one seed at one SNR. Schemes at the same
/// (seed, snr) share the channel and scenario streams.
std::vector<semantic::MetricRecord> evaluate_cell(const ExperimentConfig& config, int seed, baselines::Scheme scheme,
                                                  double snr_db, int task_period, const TrainedPair* tom,
                                                  const TrainedPair* no_tom);

/// Trains or loads both pairs for every configured seed.
RunManifest train_all(const ExperimentConfig& config, CheckpointMode mode);

/// Spectral efficiency against SNR.
SweepResult run_fig2(const ExperimentConfig& config, CheckpointMode mode = CheckpointMode::train_or_load);
/// Reliability against SNR with alternating tasks.
SweepResult run_fig3(const ExperimentConfig& config, CheckpointMode mode = CheckpointMode::train_or_load);
/// Windowed d around a task switch.
AdaptationResult run_fig4(const ExperimentConfig& config, CheckpointMode mode = CheckpointMode::train_or_load);

}  // namespace tomsc::exp
