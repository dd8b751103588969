#include "tomsc/exp/pairs.hpp"

namespace tomsc::exp {

std::unique_ptr<agents::World> make_world(const ExperimentConfig& config, int seed) {
  return std::make_unique<agents::World>(agents::build_world(config.world, static_cast<std::uint64_t>(seed)));
}

std::filesystem::path pair_checkpoint(const ExperimentConfig& config, int seed, bool tom, const std::string& role) {
  return config.checkpoints() / config.training_hash().substr(0, 16) /
         concat("seed", seed, '_', tom ? "tom" : "no_tom", '_', role, ".json");
}

namespace {

agents::AgentConfig agent_config(const ExperimentConfig& config, bool tom) {
  agents::AgentConfig a = config.agent;
  a.tom = tom;
  return a;
}

TrainedPair load_pair(const agents::World& world, const ExperimentConfig& config, int seed, bool tom) {
  const auto tx_path = pair_checkpoint(config, seed, tom, "tx");
  const auto rx_path = pair_checkpoint(config, seed, tom, "rx");
  Rng rng(0);
  const auto ac = agent_config(config, tom);
  TrainedPair p{agents::TransmitterAgent(world, ac, rng), agents::ReceiverAgent(world, ac, rng), true};
  const nn::Checkpoint tx_ck = nn::Checkpoint::load(tx_path);
  const auto flag = tx_ck.meta.find("tom");
  if (flag == tx_ck.meta.end() || (flag->second == "1") != tom) {
    fail("checkpoint ", tx_path.string(), " does not hold a ", tom ? "ToM" : "no-ToM", " transmitter");
  }
  p.tx.restore(tx_ck);
  nn::Checkpoint::load(rx_path).restore(p.rx.parameters());
  return p;
}

}  // namespace

TrainedPair obtain_pair(const agents::World& world, const ExperimentConfig& config, int seed, bool tom,
                        CheckpointMode mode) {
  const auto tx_path = pair_checkpoint(config, seed, tom, "tx");
  const auto rx_path = pair_checkpoint(config, seed, tom, "rx");
  const bool cached = std::filesystem::exists(tx_path) && std::filesystem::exists(rx_path);
  if (mode != CheckpointMode::retrain && cached) return load_pair(world, config, seed, tom);
  if (mode == CheckpointMode::load_only) {
    fail("missing checkpoint for seed ", seed, " (", tom ? "tom" : "no_tom", "): ", tx_path.string(),
         "; run the train command first");
  }
  // Both schemes share the receiver warm start for a given seed.
  Rng rng(derive_seed(static_cast<std::uint64_t>(seed), 40));
  const auto ac = agent_config(config, tom);
  agents::ReceiverAgent rx(world, ac, rng);
  agents::pretrain_receiver_policy(rx, config.pretrain_steps, config.pretrain_lr, rng);
  agents::TransmitterAgent tx(world, ac, rng);
  tx.register_library(rx.snapshot_library());
  const auto losses = train::train(tx, rx, config.train, rng);
  std::filesystem::create_directories(tx_path.parent_path());
  tx.checkpoint().save(tx_path);
  nn::Checkpoint::capture(rx.parameters()).save(rx_path);
  train::write_loss_csv(losses, tx_path.parent_path() / concat("seed", seed, '_', tom ? "tom" : "no_tom", "_losses.csv"));
  TrainedPair p = load_pair(world, config, seed, tom);
  p.loaded = false;
  return p;
}

}  // namespace tomsc::exp
