#pragma once

#include "tomsc/causal/discovery.hpp"
#include "tomsc/scenario/oracle.hpp"
#include "tomsc/semantic/metrics.hpp"

#include <vector>

namespace tomsc::agents {

struct WorldConfig {
  Index variables = 5;
  double density = 0.3;
  int discovery_samples = 50;
  int discovery_steps = 100;
  causal::DiscoveryConfig discovery;
  int alphabet = 5;
  double alpha = 1.0;
  double action_sigma = 0.7;
  double value_coupling = 1.0;
  scenario::SwitchMode switch_mode = scenario::SwitchMode::scale_up;
  int hypotheses = 8;
  double dialect_scale = 1.0;
  int stream_length = 20000;

  void validate() const;
};

/// Private state of one receiver: a fixed input offset of its decoder and
/// the task it was trained for.
struct ReceiverProfile {
  int id = 0;
  Vec dialect;  ///< length N
  int task = 0;
};

/// Everything both agents share for one seed: the ground-truth source, the
/// discovered causal graph, the action oracles per task, the receiver
/// population and the normalized observation streams.
struct World {
  WorldConfig config;
  std::uint64_t seed = 0;
  scenario::GroundTruthScm scm;
  causal::CausalGraph graph;
  double discovery_accuracy = 0.0;
  std::vector<Index> retained;     ///< variables kept by the discovered graph
  std::vector<Index> true_set;     ///< variables with an incident edge in the true graph
  std::vector<int> est_parents;    ///< discovered parent counts of retained variables
  std::vector<int> true_parents;   ///< true parent counts of retained variables
  Vec scale;                       ///< per-variable standard deviation used for normalization
  std::vector<scenario::ActionOracle> oracles;  ///< index = task id
  std::vector<ReceiverProfile> profiles;
  Mat train_stream;  ///< normalized, rows are time steps
  Mat eval_stream;

  Index n() const { return scm.n; }
  Index k() const { return static_cast<Index>(retained.size()); }
  int alphabet() const { return config.alphabet; }
  int tasks() const { return static_cast<int>(oracles.size()); }
  Index hypotheses() const { return static_cast<Index>(profiles.size()); }

  /// Retained components of a normalized observation.
  Vec state(const Vec& observation) const;
  /// Observation restricted to the true causal variables, embedded in N dims.
  Vec truth(const Vec& observation) const;
  /// Ideal action distribution for the causal state under a task.
  semantic::ActionDistribution ideal(const Vec& state, int task) const;
  /// Receivers trained for `task`.
  std::vector<int> members(int task) const;
};

World build_world(const WorldConfig& config, std::uint64_t seed);

/// A world without discovery: fixed graph, used by tests and toy runs.
World build_world_from_graph(const WorldConfig& config, const scenario::GroundTruthScm& scm, std::uint64_t seed);

}  // namespace tomsc::agents
