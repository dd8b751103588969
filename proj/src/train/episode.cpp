#include "tomsc/train/episode.hpp"

namespace tomsc::train {

namespace {

void score(StepLog& log, const agents::World& w, const semantic::ActionDistribution& policy, const Vec& z,
           const Vec& z_hat, const StepSettings& settings) {
  const auto ideal = w.ideal(z, log.task);
  log.ideal.resize(w.k(), w.alphabet());
  for (Index c = 0; c < w.k(); ++c) log.ideal.row(c) = ideal[static_cast<std::size_t>(c)].transpose();
  log.c_t = semantic::semantic_effectiveness(ideal, policy);
  log.d = semantic::quantize_feedback(semantic::feedback(log.c_t).d);
  log.e_t = semantic::semantic_distortion(log.truth, z_hat);
  log.success = log.e_t < settings.reliability.delta;
  log.reward = log.d - settings.c_len * static_cast<double>(log.channel_uses);
}

}  // namespace

StepLog run_step(agents::TransmitterAgent& tx, agents::ReceiverAgent& rx, const baselines::Transport& transport,
                 const Vec& observation, const StepSettings& settings, Rng& rng) {
  const agents::World& w = tx.world();
  const double range = tx.config().quantizer.range;
  StepLog log;
  log.profile = rx.profile().id;
  log.task = rx.profile().task;
  const Vec z = w.state(observation);
  log.truth = w.truth(observation);

  auto plan = tx.plan(z, settings.beta);
  log.candidate = agents::encode_semantic(plan.policy, settings.mode, &rng);
  log.bits_per_dim = plan.bits;
  log.cqi_used = plan.context.p_prev;
  log.context = plan.context;
  log.decoded_true = plan.simulated[static_cast<std::size_t>(log.candidate)].row(log.profile).transpose();

  const auto symbol = agents::quantize(tx.candidate(z, log.candidate), plan.bits, range);
  log.bits_sent = static_cast<long>(symbol.bits.size());
  log.payload_bits = log.bits_sent;
  const auto received = transport(symbol.bits, rng);
  log.channel_uses = static_cast<long>(received.channel_uses);
  log.cqi = received.cqi;
  log.rx_cqi = received.cqi;
  const Vec s_hat = agents::dequantize(received.bits, plan.bits, w.k(), range);

  log.decoder_input = rx.decoder_input(s_hat, w.retained);
  const Vec z_hat = rx.decode(s_hat, w.retained);
  const auto policy = rx.policy(z_hat);
  log.actions = rx.act(policy, rng);
  score(log, w, policy, z, z_hat, settings);

  log.target = tx.belief().argmax();
  log.tx_tracker_hidden = tx.tracker_hidden();
  log.rx_tracker_hidden = rx.tracker_hidden();
  log.tx_tracker_input = tx.observe(plan, log.candidate, log.actions, log.d, log.cqi);
  log.rx_tracker_input = rx.observe(log.d >= 0.5, log.actions, log.d, log.cqi);
  log.tx_belief = tx.belief().weights;
  log.rx_belief = rx.belief().weights;
  return log;
}

StepLog run_classical_step(agents::ReceiverAgent& rx, const baselines::Transport& transport, const Vec& observation,
                           double& cqi_state, const agents::QuantizerConfig& quantizer, const StepSettings& settings,
                           Rng& rng) {
  const agents::World& w = rx.world();
  StepLog log;
  log.profile = rx.profile().id;
  log.task = rx.profile().task;
  log.truth = w.truth(observation);
  const Vec z = w.state(observation);
  std::vector<Index> all(static_cast<std::size_t>(w.n()));
  for (Index v = 0; v < w.n(); ++v) all[static_cast<std::size_t>(v)] = v;

  log.bits_per_dim = quantizer.select_bits(cqi_state);
  log.cqi_used = cqi_state;
  const Vec clipped = observation.cwiseMax(-quantizer.range).cwiseMin(quantizer.range);
  const auto symbol = agents::quantize(clipped, log.bits_per_dim, quantizer.range);
  log.bits_sent = static_cast<long>(symbol.bits.size());
  log.payload_bits = static_cast<long>(w.k()) * log.bits_per_dim;
  const auto received = transport(symbol.bits, rng);
  log.channel_uses = static_cast<long>(received.channel_uses);
  log.cqi = received.cqi;
  cqi_state = received.cqi;
  const Vec s_hat = agents::dequantize(received.bits, log.bits_per_dim, w.n(), quantizer.range);
  log.decoder_input = rx.decoder_input(s_hat, all);
  const Vec z_hat = rx.decode(s_hat, all);
  const auto policy = rx.policy(z_hat);
  log.actions = rx.act(policy, rng);
  score(log, w, policy, z, z_hat, settings);
  return log;
}

Trajectory collect_episode(agents::TransmitterAgent& tx, agents::ReceiverAgent& rx, phy::Link& link,
                           const Mat& stream, Index start, int horizon, const StepSettings& settings, Rng& rng) {
  if (horizon < 1) fail("collect_episode: horizon must be positive, got ", horizon);
  Trajectory traj;
  traj.snr_db = link.snr_db();
  traj.profile = rx.profile().id;
  tx.begin_episode(link.snr_db());
  rx.begin_episode();
  const auto transport = baselines::plain_transport(link);
  for (int t = 0; t < horizon; ++t) {
    const Index row = (start + t) % stream.rows();
    StepLog s;
    try {
      s = run_step(tx, rx, transport, stream.row(row).transpose(), settings, rng);
    } catch (const Error& e) {
      fail("episode step ", t, ": ", e.what());
    }
    s.step = t;
    traj.steps.push_back(std::move(s));
  }
  return traj;
}

semantic::MetricRecord to_record(const StepLog& s, long episode, double snr_db) {
  semantic::MetricRecord r;
  r.episode = episode;
  r.snr_db = snr_db;
  r.c_t = s.c_t;
  r.d_t = s.d;
  r.e_t = s.e_t;
  r.bits_sent = s.bits_sent;
  r.payload_bits = s.payload_bits;
  r.channel_uses = s.channel_uses;
  r.success = s.success;
  return r;
}

}  // namespace tomsc::train
