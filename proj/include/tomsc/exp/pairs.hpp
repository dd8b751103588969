#pragma once

#include "tomsc/exp/config.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace tomsc::exp {

enum class CheckpointMode {
  train_or_load,  ///< reuse a cached checkpoint, train when missing
  load_only,      ///< missing checkpoint is an error
  retrain,        ///< always train and overwrite
};

struct TrainedPair {
  agents::TransmitterAgent tx;
  agents::ReceiverAgent rx;
  bool loaded = false;  ///< true when no training happened in this call
};

std::unique_ptr<agents::World> make_world(const ExperimentConfig& config, int seed);

/// <checkpoints>/<training hash prefix>/seed<seed>_<tom|no_tom>_<tx|rx>.json
std::filesystem::path pair_checkpoint(const ExperimentConfig& config, int seed, bool tom, const std::string& role);

/// Trains (or loads) the agent pair for one seed. Freshly trained agents are
/// saved and read back so cached and uncached runs evaluate identical state.
TrainedPair obtain_pair(const agents::World& world, const ExperimentConfig& config, int seed, bool tom,
                        CheckpointMode mode);

}  // namespace tomsc::exp
