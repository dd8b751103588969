#include "tomsc/train/online.hpp"

#include "tomsc/baselines/transport.hpp"
#include "tomsc/phy/link.hpp"

namespace tomsc::train {

void AdaptationConfig::validate() const {
  if (window < 1) fail("adaptation: window must be positive");
  if (samples < window || samples % window != 0) fail("adaptation: samples must be a positive multiple of the window");
  if (switch_at <= 0 || switch_at >= samples) fail("adaptation: switch must fall inside the stream");
  if (switch_at % window != 0) fail("adaptation: switch must fall on a window boundary");
  if (horizon < 1) fail("adaptation: horizon must be positive");
  if (!(beta > 0.0)) fail("adaptation: beta must be positive");
  if (learning_rate < 0.0) fail("adaptation: learning rate must be nonnegative");
  if (gamma < 0.0 || gamma >= 1.0) fail("adaptation: gamma must lie in [0, 1)");
  reliability.validate();
}

double online_q_update(agents::TransmitterAgent& tx, const agents::QContext& context, Index candidate, double target,
                       double learning_rate) {
  const Index h = context.distortion.cols();
  const double delta = tx.config().delta;
  Mat rows(h, 0);
  for (Index i = 0; i < h; ++i) {
    const Vec r = agents::q_feature_row(context, candidate, i, delta);
    if (i == 0) rows.resize(h, r.size());
    rows.row(i) = r.transpose();
  }
  nn::Tape tape;
  nn::Var q = tx.q_net().forward(tape, tape.constant(rows));
  nn::Var qbar = nn::matmul_const(context.belief.transpose(), q);
  nn::Var loss = nn::sum(nn::square(nn::add_scalar(qbar, -target)));
  nn::zero_grads(tx.q_parameters());
  tape.backward(loss);
  for (auto* p : tx.q_parameters()) p->apply_delta(-learning_rate * p->grad());
  return loss.scalar();
}

namespace {

int pick_member(const agents::World& w, int task, Rng& rng) {
  auto pool = w.members(task);
  if (pool.empty()) fail("adaptation: no receiver serves task ", task);
  std::uniform_int_distribution<std::size_t> d(0, pool.size() - 1);
  return pool[d(rng)];
}

double best_mean_q(const agents::TransmitterAgent& tx, const agents::QContext& ctx) {
  return (agents::q_values(tx.q_net(), ctx, tx.config().delta) * ctx.belief).maxCoeff();
}

}  // namespace

AdaptationTrace run_adaptation(const agents::TransmitterAgent& tx_in, const agents::ReceiverAgent& rx_in,
                               const AdaptationConfig& config, Rng& rng) {
  config.validate();
  const agents::World& w = rx_in.world();
  if (w.tasks() < 2) fail("adaptation: the world has a single task");
  agents::TransmitterAgent tx = tx_in;
  agents::ReceiverAgent rx = rx_in;
  Rng scenario(derive_seed(config.scenario_seed, 31));
  AdaptationTrace trace;
  trace.pre_receiver = pick_member(w, 0, scenario);
  trace.post_receiver = pick_member(w, 1, scenario);
  trace.switch_window = config.switch_at / config.window;

  phy::FadingLink link(config.snr_db);
  const baselines::Transport transport = baselines::plain_transport(link);
  StepSettings settings;
  settings.beta = config.beta;
  settings.mode = agents::SelectMode::sample;
  settings.c_len = config.c_len;
  settings.reliability = config.reliability;

  tx.reset_partner();
  rx.set_profile(w.profiles[static_cast<std::size_t>(trace.pre_receiver)]);
  bool pending = false;
  agents::QContext prev_ctx;
  Index prev_j = 0;
  double prev_r = 0.0;
  double window_sum = 0.0;
  for (int t = 0; t < config.samples; ++t) {
    if (t == config.switch_at) rx.set_profile(w.profiles[static_cast<std::size_t>(trace.post_receiver)]);
    const bool episode_start = t % config.horizon == 0;
    if (episode_start) {
      if (pending) online_q_update(tx, prev_ctx, prev_j, prev_r, config.learning_rate);
      pending = false;
      rx.begin_episode();
      tx.begin_episode(config.snr_db);
    }
    const Vec obs = w.eval_stream.row(t % w.eval_stream.rows()).transpose();
    StepLog s = run_step(tx, rx, transport, obs, settings, rng);
    if (pending) {
      online_q_update(tx, prev_ctx, prev_j, prev_r + config.gamma * best_mean_q(tx, s.context), config.learning_rate);
    }
    prev_ctx = s.context;
    prev_j = s.candidate;
    prev_r = s.reward;
    pending = true;
    window_sum += s.d;
    if ((t + 1) % config.window == 0) {
      trace.window_d.push_back(window_sum / config.window);
      window_sum = 0.0;
    }
  }
  return trace;
}

int recovery_windows(const std::vector<double>& window_d, int switch_window, int baseline, double fraction) {
  if (baseline < 1) fail("recovery: baseline must be positive");
  if (switch_window < baseline || switch_window >= static_cast<int>(window_d.size())) {
    fail("recovery: switch window ", switch_window, " needs ", baseline, " windows before it and one after");
  }
  double pre = 0.0;
  for (int i = switch_window - baseline; i < switch_window; ++i) pre += window_d[static_cast<std::size_t>(i)];
  const double level = fraction * pre / baseline;
  for (int i = switch_window; i < static_cast<int>(window_d.size()); ++i) {
    if (window_d[static_cast<std::size_t>(i)] >= level) return i - switch_window;
  }
  return -1;
}

}  // namespace tomsc::train
