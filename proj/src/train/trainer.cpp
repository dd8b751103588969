#include "tomsc/train/trainer.hpp"

#include "tomsc/train/losses.hpp"

#include <cmath>
#include <fstream>

namespace tomsc::train {

void TrainConfig::validate() const {
  if (eta_q < 0.0 || eta_pi < 0.0 || eta_f < 0.0 || receiver_eta() < 0.0) fail("train: learning rates must be nonnegative");
  if (!(step_size > 0.0) || !(receiver_step() >= 0.0)) fail("train: step sizes must be positive (the receiver step may be zero)");
  if (batch < 1) fail("train: batch size must be at least 1");
  if (horizon < 1) fail("train: horizon must be at least 1");
  if (gamma < 0.0 || gamma >= 1.0) fail("train: gamma must lie in [0, 1), got ", gamma);
  if (!(beta_start > 0.0) || !(beta_end > 0.0)) fail("train: beta must be positive");
  if (rounds < 0) fail("train: rounds must be nonnegative");
  if (sync_period < 1) fail("train: target sync period must be at least 1");
  if (capacity < batch) fail("train: buffer capacity ", capacity, " below batch size ", batch);
  if (updates_per_round < 1) fail("train: need at least one update per round");
  if (snr_db.empty()) fail("train: empty SNR list");
  p2.validate();
}

double TrainConfig::beta(int round) const {
  if (rounds <= 1) return beta_end;
  const double f = static_cast<double>(round) / static_cast<double>(rounds - 1);
  return beta_start + (beta_end - beta_start) * f;
}

namespace {

struct Row {
  const StepLog* step;
  const StepLog* next;  ///< nullptr at the end of a trajectory
};

std::vector<Row> flatten(const std::vector<const Trajectory*>& batch) {
  std::vector<Row> rows;
  for (const auto* traj : batch) {
    for (std::size_t t = 0; t < traj->steps.size(); ++t) {
      rows.push_back({&traj->steps[t], t + 1 < traj->steps.size() ? &traj->steps[t + 1] : nullptr});
    }
  }
  if (rows.empty()) fail("train: empty batch");
  return rows;
}

nn::Var weighted_total(RoundLosses& l, double eta_first, const TrainConfig& c) {
  nn::Var total = nn::scale(l.q, eta_first);
  if (l.pi.valid()) total = total + nn::scale(l.pi, c.eta_pi);
  if (l.f.valid()) total = total + nn::scale(l.f, c.eta_f);
  return total;
}

}  // namespace

RoundLosses transmitter_losses(nn::Tape& tape, agents::TransmitterAgent& tx, const std::vector<const Trajectory*>& batch,
                               const TrainConfig& config) {
  const auto rows = flatten(batch);
  const agents::World& w = tx.world();
  const Index h = tx.hypotheses();
  const Index c = tx.candidates();
  const double delta = tx.config().delta;
  const Index n_rows = static_cast<Index>(rows.size());
  const bool tom = tx.tom();
  const Index per = tom ? 1 : h;

  Mat features(n_rows * per, 3 + c + h);
  Vec targets(n_rows);
  for (Index r = 0; r < n_rows; ++r) {
    const StepLog& s = *rows[static_cast<std::size_t>(r)].step;
    if (tom) {
      features.row(r) = agents::q_feature_row(s.context, s.candidate, s.profile, delta).transpose();
    } else {
      for (Index i = 0; i < h; ++i) {
        features.row(r * h + i) = agents::q_feature_row(s.context, s.candidate, i, delta).transpose();
      }
    }
    double next_max = 0.0;
    const StepLog* next = rows[static_cast<std::size_t>(r)].next;
    if (next != nullptr) {
      const Mat qn = agents::q_values(tx.q_target(), next->context, delta);
      next_max = tom ? qn.col(s.profile).maxCoeff() : qn.rowwise().mean().maxCoeff();
    }
    targets[r] = q_target(s.reward, next_max, config.gamma, next == nullptr);
  }
  RoundLosses out;
  nn::Var q = tx.q_net().forward(tape, tape.constant(features));
  if (!tom) {
    Mat avg = Mat::Zero(n_rows, n_rows * h);
    for (Index r = 0; r < n_rows; ++r) avg.block(r, r * h, 1, h).setConstant(1.0 / static_cast<double>(h));
    q = nn::matmul_const(avg, q);
  }
  out.q = loss_q(q, targets);

  if (tom) {
    const Index k = w.k();
    Mat pf(n_rows * k, agents::policy_width(w) + 1);
    std::vector<int> actions;
    actions.reserve(static_cast<std::size_t>(n_rows * k));
    Mat tin(n_rows, tx.tracker().input_dim());
    Mat thid(n_rows, tx.tracker().hidden_dim());
    Mat tgt(n_rows, h);
    for (Index r = 0; r < n_rows; ++r) {
      const StepLog& s = *rows[static_cast<std::size_t>(r)].step;
      pf.middleRows(r * k, k) = tx.partner_features(s.decoded_true, s.task, s.cqi_used);
      for (int a : s.actions) actions.push_back(a);
      tin.row(r) = s.tx_tracker_input.transpose();
      thid.row(r) = s.tx_tracker_hidden.transpose();
      tgt.row(r) = s.rx_belief.transpose();
    }
    out.pi = loss_partner_policy(nn::log_softmax_rows(tx.partner_net().forward(tape, tape.constant(pf))), actions);
    out.f = loss_belief(tx.tracker().forward(tape, tape.constant(tin), tape.constant(thid)), tgt);
  }
  out.total = weighted_total(out, config.eta_q, config);
  return out;
}

RoundLosses receiver_losses(nn::Tape& tape, agents::ReceiverAgent& rx, const std::vector<const Trajectory*>& batch,
                            const TrainConfig& config) {
  const auto rows = flatten(batch);
  const agents::World& w = rx.world();
  const Index n = w.n();
  const Index k = w.k();
  const Index h = w.hypotheses();
  const Index n_rows = static_cast<Index>(rows.size());

  Mat dec_in(n_rows, 2 * n);
  Mat truth(n_rows, n);
  Mat ideal(n_rows * k, w.alphabet());
  Mat aux(n_rows * k, agents::policy_width(w) - 1);
  for (Index r = 0; r < n_rows; ++r) {
    const StepLog& s = *rows[static_cast<std::size_t>(r)].step;
    dec_in.row(r) = s.decoder_input.transpose();
    truth.row(r) = s.truth.transpose();
    ideal.middleRows(r * k, k) = s.ideal;
    aux.middleRows(r * k, k) = agents::policy_aux(w, s.task);
  }
  Mat select = Mat::Zero(n, k);
  Mat mask = Mat::Zero(n, n);
  for (Index c = 0; c < k; ++c) {
    const Index v = w.retained[static_cast<std::size_t>(c)];
    select(v, c) = 1.0;
    mask(v, v) = 1.0;
  }
  nn::Var decoded = rx.trunk().forward(tape, tape.constant(dec_in));
  nn::Var z_hat = nn::matmul(decoded, tape.constant(mask));
  nn::Var per_comp = nn::reshape(nn::matmul(decoded, tape.constant(select)), n_rows * k, 1);
  nn::Var pin = nn::concat_cols({per_comp, tape.constant(aux)});
  nn::Var logp = nn::log_softmax_rows(rx.policy_net().forward(tape, pin));
  nn::Var dist = nn::sum_cols(nn::square(z_hat - tape.constant(truth)));
  RoundLosses out;
  out.q = agents::receiver_objective(logp, ideal, dist, config.p2);

  if (rx.config().tom) {
    Mat pf = Mat::Zero(n_rows, 2 * h + 1);
    std::vector<int> outcome;
    Mat tin(n_rows, rx.tracker().input_dim());
    Mat thid(n_rows, rx.tracker().hidden_dim());
    Mat tgt(n_rows, h);
    for (Index r = 0; r < n_rows; ++r) {
      const StepLog& s = *rows[static_cast<std::size_t>(r)].step;
      pf(r, s.target) = 1.0;
      pf(r, h + s.profile) = 1.0;
      pf(r, 2 * h) = s.rx_cqi / 20.0;
      outcome.push_back(s.d >= 0.5 ? 1 : 0);
      tin.row(r) = s.rx_tracker_input.transpose();
      thid.row(r) = s.rx_tracker_hidden.transpose();
      tgt.row(r) = s.tx_belief.transpose();
    }
    nn::Var logit = rx.partner_net().forward(tape, tape.constant(pf));
    nn::Var two = nn::concat_cols({tape.constant(Mat::Zero(n_rows, 1)), logit});
    out.pi = loss_partner_policy(nn::log_softmax_rows(two), outcome);
    out.f = loss_belief(rx.tracker().forward(tape, tape.constant(tin), tape.constant(thid)), tgt);
  }
  out.total = weighted_total(out, config.receiver_eta(), config);
  return out;
}

Trajectory collect_training_episode(agents::TransmitterAgent& tx, agents::ReceiverAgent& rx, const TrainConfig& config,
                                    double beta, Rng& rng) {
  const agents::World& w = tx.world();
  std::uniform_int_distribution<std::size_t> pick_profile(0, w.profiles.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_snr(0, config.snr_db.size() - 1);
  std::uniform_int_distribution<Index> pick_start(0, w.train_stream.rows() - 1);
  const auto& profile = w.profiles[pick_profile(rng)];
  const double snr = config.snr_db[pick_snr(rng)];
  const Index start = pick_start(rng);
  phy::FadingLink link(snr);
  tx.reset_partner();
  rx.set_profile(profile);
  StepSettings settings;
  settings.beta = beta;
  settings.mode = agents::SelectMode::sample;
  settings.c_len = config.c_len;
  settings.reliability = config.p2.reliability;
  return collect_episode(tx, rx, link, w.train_stream, start, config.horizon, settings, rng);
}

std::vector<LossReport> train(agents::TransmitterAgent& tx, agents::ReceiverAgent& rx, const TrainConfig& config,
                              Rng& rng) {
  config.validate();
  nn::OptimizerConfig oc;
  oc.kind = config.optimizer;
  oc.clip = config.clip;
  nn::Optimizer tx_opt(tx.parameters(), oc);
  nn::Optimizer rx_opt(rx.parameters(), oc);
  ReplayBuffer<Trajectory> buffer(static_cast<std::size_t>(config.capacity));
  std::vector<LossReport> reports;
  for (int round = 0; round < config.rounds; ++round) {
    const bool tx_round = round % 2 == 0;
    if (!config.persistent_buffer) buffer.clear();
    const double beta = config.beta(round);
    double sum_d = 0.0;
    double sum_c = 0.0;
    long count = 0;
    for (int e = 0; e < config.batch; ++e) {
      Trajectory traj = collect_training_episode(tx, rx, config, beta, rng);
      for (const auto& s : traj.steps) {
        sum_d += s.d;
        sum_c += s.c_t;
        ++count;
      }
      buffer.add(std::move(traj));
    }
    LossReport rep;
    rep.round = round;
    rep.agent = tx_round ? "tx" : "rx";
    rep.mean_d = sum_d / static_cast<double>(count);
    rep.mean_ct = sum_c / static_cast<double>(count);
    for (int u = 0; u < config.updates_per_round; ++u) {
      const auto batch = buffer.sample(static_cast<std::size_t>(config.batch), rng);
      nn::Tape tape;
      RoundLosses l = tx_round ? transmitter_losses(tape, tx, batch, config) : receiver_losses(tape, rx, batch, config);
      const double total = l.total.scalar();
      if (!std::isfinite(total)) {
        fail("train: non-finite loss at round ", round, " (", rep.agent, ", update ", u, "): L_Q=", l.q.scalar(),
             " L_pi=", l.pi.valid() ? l.pi.scalar() : 0.0, " L_f=", l.f.valid() ? l.f.scalar() : 0.0);
      }
      nn::Optimizer& opt = tx_round ? tx_opt : rx_opt;
      opt.zero_grad();
      tape.backward(l.total);
      opt.step(tx_round ? config.step_size : config.receiver_step());
      rep.l_q = l.q.scalar();
      rep.l_pi = l.pi.valid() ? l.pi.scalar() : 0.0;
      rep.l_f = l.f.valid() ? l.f.scalar() : 0.0;
      rep.total = total;
    }
    if ((round + 1) % config.sync_period == 0) tx.sync_target();
    if (!tx_round) tx.register_library(rx.snapshot_library());
    reports.push_back(rep);
    if (config.checkpoint_every > 0 && (round + 1) % config.checkpoint_every == 0) {
      tx.checkpoint().save(config.checkpoint_dir / concat("tx_round", round + 1, ".json"));
      nn::Checkpoint::capture(rx.parameters()).save(config.checkpoint_dir / concat("rx_round", round + 1, ".json"));
    }
  }
  return reports;
}

const char* loss_csv_header() { return "round,agent,L_Q,L_pi,L_f,mean_d,mean_Ct"; }

void write_loss_csv(const std::vector<LossReport>& reports, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail("cannot write ", path.string());
  out.precision(17);
  out << loss_csv_header() << '\n';
  for (const auto& r : reports) {
    out << r.round << ',' << r.agent << ',' << r.l_q << ',' << r.l_pi << ',' << r.l_f << ',' << r.mean_d << ','
        << r.mean_ct << '\n';
  }
}

}  // namespace tomsc::train
