#pragma once

#include "tomsc/agents/agents.hpp"
#include "tomsc/baselines/schemes.hpp"
#include "tomsc/train/online.hpp"
#include "tomsc/train/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace tomsc::exp {

/// Everything a figure run needs. Defaults are the desk-scale settings.
struct ExperimentConfig {
  agents::WorldConfig world;
  agents::AgentConfig agent;
  train::TrainConfig train;
  int pretrain_steps = 1500;
  double pretrain_lr = 0.01;
  baselines::EvalConfig eval;
  int fig3_task_period = 50;
  train::AdaptationConfig adaptation;

  std::vector<int> seeds;
  std::vector<double> snr_db = {0.0, 5.0, 10.0, 15.0, 20.0};
  std::vector<baselines::Scheme> fig2_schemes;
  std::vector<baselines::Scheme> fig3_schemes;
  double delta = 0.5;
  double epsilon = 0.1;
  double lambda = 1.0;
  double c_len = 0.01;
  std::filesystem::path out_dir = "out";
  /// Empty means <out_dir>/checkpoints.
  std::filesystem::path checkpoint_dir;
  /// 0 means one worker per hardware thread.
  int workers = 0;

  ExperimentConfig();

  /// Copies the shared values (delta, epsilon, lambda, c_len) into the nested configs.
  void resolve();
  void validate() const;
  std::filesystem::path checkpoints() const;
  int worker_count() const;

  /// Canonical INI text: every key, fixed order, full precision.
  std::string to_ini() const;
  /// SHA-256 of to_ini().
  std::string hash() const;
  /// SHA-256 over the keys that influence trained agents only.
  std::string training_hash() const;
};

/// Parses INI text on top of the defaults; unknown sections or keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies TOMSC_OUT_DIR and TOMSC_WORKERS when set.
void apply_environment(ExperimentConfig& config);

std::vector<int> parse_seed_list(const std::string& text);

}  // namespace tomsc::exp
