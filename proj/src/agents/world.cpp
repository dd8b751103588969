#include "tomsc/agents/world.hpp"

#include <cmath>

namespace tomsc::agents {

void WorldConfig::validate() const {
  if (variables < 2) fail("world: need at least 2 variables, got ", variables);
  if (alphabet < 2) fail("world: action alphabet must be at least 2, got ", alphabet);
  if (hypotheses < 1) fail("world: need at least one receiver hypothesis");
  if (dialect_scale < 0.0) fail("world: dialect scale must be nonnegative");
  if (stream_length < 100) fail("world: stream length must be at least 100, got ", stream_length);
}

Vec World::state(const Vec& observation) const {
  Vec z(k());
  for (Index i = 0; i < k(); ++i) z[i] = observation[retained[static_cast<std::size_t>(i)]];
  return z;
}

Vec World::truth(const Vec& observation) const {
  Vec out = Vec::Zero(n());
  for (Index v : true_set) out[v] = observation[v];
  return out;
}

semantic::ActionDistribution World::ideal(const Vec& state, int task) const {
  return oracles.at(static_cast<std::size_t>(task)).distribution(true_parents, state);
}

std::vector<int> World::members(int task) const {
  std::vector<int> out;
  for (const auto& p : profiles) {
    if (p.task == task) out.push_back(p.id);
  }
  return out;
}

namespace {

std::vector<Index> incident(const scenario::Adjacency& adj) {
  std::vector<Index> out;
  for (Index v = 0; v < adj.rows(); ++v) {
    if (adj.row(v).any() || adj.col(v).any()) out.push_back(v);
  }
  return out;
}

void finish_world(World& w, std::uint64_t seed) {
  const WorldConfig& cfg = w.config;
  if (w.retained.empty()) fail("world: the causal graph retains no variables");
  w.true_set = incident(w.scm.adjacency);
  const auto est = w.graph.parent_counts();
  const auto truth = w.scm.parent_counts();
  w.est_parents.clear();
  w.true_parents.clear();
  for (Index v : w.retained) {
    w.est_parents.push_back(est[static_cast<std::size_t>(v)]);
    w.true_parents.push_back(truth[static_cast<std::size_t>(v)]);
  }

  Rng stream_rng(derive_seed(seed, 11));
  auto series = scenario::generate_timeseries(w.scm, 2, cfg.stream_length, stream_rng);
  Mat train = series.samples[0];
  Mat eval = series.samples[1];
  w.scale.resize(w.n());
  for (Index v = 0; v < w.n(); ++v) {
    const double mean = train.col(v).mean();
    const double var = (train.col(v).array() - mean).square().mean();
    w.scale[v] = std::sqrt(std::max(var, 1e-12));
  }
  for (Index v = 0; v < w.n(); ++v) {
    train.col(v) /= w.scale[v];
    eval.col(v) /= w.scale[v];
  }
  w.train_stream = std::move(train);
  w.eval_stream = std::move(eval);

  scenario::ActionOracle base(cfg.alphabet, cfg.alpha, cfg.action_sigma, cfg.value_coupling);
  w.oracles = {base, scenario::switch_task(base, cfg.switch_mode)};

  Rng dialect_rng(derive_seed(seed, 12));
  w.profiles.clear();
  for (int h = 0; h < cfg.hypotheses; ++h) {
    ReceiverProfile p;
    p.id = h;
    p.task = (cfg.hypotheses > 1 && 2 * h >= cfg.hypotheses) ? 1 : 0;
    p.dialect.resize(w.n());
    for (Index v = 0; v < w.n(); ++v) p.dialect[v] = cfg.dialect_scale * standard_normal(dialect_rng);
    w.profiles.push_back(std::move(p));
  }
}

}  // namespace

World build_world(const WorldConfig& config, std::uint64_t seed) {
  config.validate();
  World w;
  w.config = config;
  w.seed = seed;
  w.scm = scenario::generate_scm(config.variables, config.density, derive_seed(seed, 1));
  Rng data_rng(derive_seed(seed, 2));
  auto data = scenario::generate_timeseries(w.scm, config.discovery_samples, config.discovery_steps, data_rng);
  Rng fit_rng(derive_seed(seed, 3));
  auto result = causal::train_discovery(data, config.discovery, fit_rng);
  w.graph = result.graph;
  w.discovery_accuracy = causal::score_recovery(w.graph, w.scm.adjacency).accuracy;
  w.retained = w.graph.connected();
  finish_world(w, seed);
  return w;
}

World build_world_from_graph(const WorldConfig& config, const scenario::GroundTruthScm& scm, std::uint64_t seed) {
  config.validate();
  World w;
  w.config = config;
  w.seed = seed;
  w.scm = scm;
  w.graph.n = scm.n;
  w.graph.adjacency = scm.adjacency;
  Mat edge = scm.adjacency.cast<double>();
  w.graph.probs = {Mat::Ones(scm.n, scm.n) - edge, edge};
  w.retained = w.graph.connected();
  w.discovery_accuracy = 1.0;
  finish_world(w, seed);
  return w;
}

}  // namespace tomsc::agents
