#include "tomsc/baselines/schemes.hpp"

namespace tomsc::baselines {

Scheme parse_scheme(const std::string& name) {
  if (name == "tom") return Scheme::tom;
  if (name == "no_tom") return Scheme::no_tom;
  if (name == "classical") return Scheme::classical;
  if (name == "repetition") return Scheme::repetition;
  if (name == "harq") return Scheme::harq;
  fail("unknown scheme '", name, "' (expected tom, no_tom, classical, repetition or harq)");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::tom: return "tom";
    case Scheme::no_tom: return "no_tom";
    case Scheme::classical: return "classical";
    case Scheme::repetition: return "repetition";
    case Scheme::harq: return "harq";
  }
  return "tom";
}

void BaselineConfig::validate() const {
  if (k_repeats < 1) fail("baseline: k_repeats must be at least 1");
  if (max_retx < 0) fail("baseline: max_retx must be nonnegative");
}

void EvalConfig::validate() const {
  if (episodes < 1) fail("eval: need at least one episode");
  if (horizon < 1) fail("eval: horizon must be positive");
  if (partner_period < 1) fail("eval: partner period must be positive");
  if (task_period < 0) fail("eval: task period must be nonnegative");
  if (!(beta > 0.0)) fail("eval: beta must be positive");
  reliability.validate();
  baseline.validate();
}

std::vector<int> partner_schedule(const agents::World& world, const EvalConfig& config) {
  Rng rng(derive_seed(config.scenario_seed, 21));
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(config.episodes));
  int current = 0;
  for (int e = 0; e < config.episodes; ++e) {
    if (e % config.partner_period == 0) {
      std::vector<int> pool;
      if (config.task_period > 0) {
        pool = world.members((e / config.task_period) % world.tasks());
        if (pool.empty()) pool = world.members(0);
      } else {
        for (const auto& p : world.profiles) pool.push_back(p.id);
      }
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      current = pool[pick(rng)];
    }
    out.push_back(current);
  }
  return out;
}

namespace {

Transport make_transport(Scheme scheme, phy::Link& link, const BaselineConfig& b) {
  switch (scheme) {
    case Scheme::repetition: return repetition_transport(link, b.k_repeats);
    case Scheme::harq: return harq_transport(link, b.max_retx);
    default: return plain_transport(link);
  }
}

}  // namespace

std::vector<semantic::MetricRecord> run_scheme(Scheme scheme, const agents::TransmitterAgent& tx_in,
                                               const agents::ReceiverAgent& rx_in, const EvalConfig& config,
                                               Rng& rng) {
  config.validate();
  const agents::World& w = rx_in.world();
  agents::TransmitterAgent tx = tx_in;
  agents::ReceiverAgent rx = rx_in;
  if (scheme == Scheme::tom && !tx.tom()) fail("run_scheme: the tom scheme needs a ToM transmitter");
  if (scheme != Scheme::classical && scheme != Scheme::tom && tx.tom()) {
    fail("run_scheme: scheme ", to_string(scheme), " needs a transmitter without ToM");
  }
  const auto schedule = partner_schedule(w, config);
  phy::FadingLink link(config.snr_db);
  const Transport transport = make_transport(scheme, link, config.baseline);
  train::StepSettings settings;
  settings.beta = config.beta;
  settings.mode = agents::SelectMode::greedy;
  settings.c_len = config.c_len;
  settings.reliability = config.reliability;

  std::vector<semantic::MetricRecord> records;
  records.reserve(static_cast<std::size_t>(config.episodes * config.horizon));
  tx.reset_partner();
  int current = -1;
  double cqi_state = config.snr_db;
  const Index rows = w.eval_stream.rows();
  for (int e = 0; e < config.episodes; ++e) {
    const int partner = schedule[static_cast<std::size_t>(e)];
    if (partner != current) {
      rx.set_profile(w.profiles[static_cast<std::size_t>(partner)]);
      current = partner;
    }
    rx.begin_episode();
    tx.begin_episode(config.snr_db);
    for (int t = 0; t < config.horizon; ++t) {
      const Index row = (static_cast<Index>(e) * config.horizon + t) % rows;
      const Vec obs = w.eval_stream.row(row).transpose();
      train::StepLog s = scheme == Scheme::classical
                             ? train::run_classical_step(rx, transport, obs, cqi_state, tx.config().quantizer,
                                                         settings, rng)
                             : train::run_step(tx, rx, transport, obs, settings, rng);
      records.push_back(train::to_record(s, static_cast<long>(e) * config.horizon + t, config.snr_db));
    }
  }
  return records;
}

std::vector<semantic::MetricRecord> run_sc_no_tom(const agents::TransmitterAgent& tx, const agents::ReceiverAgent& rx,
                                                  const EvalConfig& config, Rng& rng) {
  return run_scheme(Scheme::no_tom, tx, rx, config, rng);
}

std::vector<semantic::MetricRecord> run_classical(const agents::ReceiverAgent& rx,
                                                  const agents::QuantizerConfig& quantizer, const EvalConfig& config,
                                                  Rng& rng) {
  config.validate();
  const agents::World& w = rx.world();
  agents::ReceiverAgent r = rx;
  const auto schedule = partner_schedule(w, config);
  phy::FadingLink link(config.snr_db);
  const Transport transport = plain_transport(link);
  train::StepSettings settings;
  settings.c_len = config.c_len;
  settings.reliability = config.reliability;
  std::vector<semantic::MetricRecord> records;
  int current = -1;
  double cqi_state = config.snr_db;
  for (int e = 0; e < config.episodes; ++e) {
    const int partner = schedule[static_cast<std::size_t>(e)];
    if (partner != current) {
      r.set_profile(w.profiles[static_cast<std::size_t>(partner)]);
      current = partner;
    }
    r.begin_episode();
    for (int t = 0; t < config.horizon; ++t) {
      const Index row = (static_cast<Index>(e) * config.horizon + t) % w.eval_stream.rows();
      train::StepLog s = train::run_classical_step(r, transport, w.eval_stream.row(row).transpose(), cqi_state,
                                                   quantizer, settings, rng);
      records.push_back(train::to_record(s, static_cast<long>(e) * config.horizon + t, config.snr_db));
    }
  }
  return records;
}

}  // namespace tomsc::baselines
