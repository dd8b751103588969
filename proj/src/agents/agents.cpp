#include "tomsc/agents/agents.hpp"

#include "tomsc/nn/optim.hpp"
#include "tomsc/nn/prob.hpp"

#include <Eigen/QR>

#include <cmath>

namespace tomsc::agents {

void AgentConfig::validate() const {
  if (anchors < 1) fail("agent: codebook needs at least one anchor");
  if (q_hidden < 1 || partner_hidden < 1 || policy_hidden < 1 || tracker_hidden < 1) {
    fail("agent: hidden sizes must be positive");
  }
  if (!(delta > 0.0)) fail("agent: delta must be positive");
  quantizer.validate();
}

DecoderWeights identity_decoder(Index n) {
  DecoderWeights d;
  d.weights = Mat::Zero(n, 2 * n);
  d.weights.leftCols(n).setIdentity();
  d.bias = Vec::Zero(n);
  return d;
}

Vec decoder_input(const Vec& dialect, const std::vector<Index>& indices, const Vec& s_hat, const Vec& previous) {
  const Index n = dialect.size();
  if (s_hat.size() != static_cast<Index>(indices.size())) {
    throw DimensionError(concat("decoder: symbol has ", s_hat.size(), " values for ", indices.size(), " indices"));
  }
  if (previous.size() != n) {
    throw DimensionError(concat("decoder: previous state has ", previous.size(), " entries, expected ", n));
  }
  Vec in = Vec::Zero(2 * n);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Index v = indices[i];
    in[v] = s_hat[static_cast<Index>(i)] - dialect[v];
  }
  in.tail(n) = previous;
  return in;
}

Vec decode_state(const DecoderWeights& decoder, const Vec& dialect, const std::vector<Index>& indices,
                 const Vec& s_hat, const Vec& previous) {
  const Vec in = decoder_input(dialect, indices, s_hat, previous);
  const Vec raw = decoder.weights * in + decoder.bias;
  Vec out = Vec::Zero(dialect.size());
  for (Index v : indices) out[v] = raw[v];
  return out;
}

Vec gather(const Vec& full, const std::vector<Index>& indices) {
  Vec out(static_cast<Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) out[static_cast<Index>(i)] = full[indices[i]];
  return out;
}

Vec q_feature_row(const QContext& ctx, Index j, Index h, double delta) {
  const Index c = ctx.distortion.rows();
  const Index hyp = ctx.distortion.cols();
  if (ctx.tracked.size() != hyp) {
    throw DimensionError(concat("q features: tracked belief has ", ctx.tracked.size(), " entries for ", hyp,
                                " hypotheses"));
  }
  Vec x = Vec::Zero(3 + c + hyp);
  const double e = ctx.distortion(j, h);
  x[0] = e / (e + delta);
  x[1] = ctx.d_prev;
  x[2] = ctx.p_prev / 20.0;
  x[3 + j] = 1.0;
  x.tail(hyp) = ctx.tracked;
  return x;
}

Mat q_features(const QContext& ctx, double delta) {
  const Index c = ctx.distortion.rows();
  const Index h = ctx.distortion.cols();
  Mat x(c * h, 3 + c + h);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < h; ++i) x.row(j * h + i) = q_feature_row(ctx, j, i, delta).transpose();
  return x;
}

Mat q_values(const nn::Mlp& q, const QContext& ctx, double delta) {
  const Index c = ctx.distortion.rows();
  const Index h = ctx.distortion.cols();
  const auto& layers = q.layers();
  if (layers.size() != 2 || layers[0].in_dim() != 3 + c + h) {
    const Mat out = q.apply_batch(q_features(ctx, delta));
    Mat values(c, h);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < h; ++i) values(j, i) = out(j * h + i, 0);
    return values;
  }
  // The first layer splits into a shared part, a per-candidate column and a
  // rank-one distortion term.
  const Mat& w1 = layers[0].weights().value();
  const Index hidden = w1.rows();
  Vec common = layers[0].bias().value().row(0).transpose();
  common += w1.col(1) * ctx.d_prev + w1.col(2) * (ctx.p_prev / 20.0);
  common += w1.rightCols(h) * ctx.tracked;
  const Vec w_e = w1.col(0);
  const Mat& w2 = layers[1].weights().value();
  const double b2 = layers[1].bias().value()(0, 0);
  Mat pre(hidden, c * h);
  for (Index j = 0; j < c; ++j) {
    const Vec base = common + w1.col(3 + j);
    for (Index i = 0; i < h; ++i) {
      const double e = ctx.distortion(j, i);
      pre.col(j * h + i) = base + w_e * (e / (e + delta));
    }
  }
  const Mat out = w2 * nn::activate(pre, layers[0].activation());
  Mat values(c, h);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < h; ++i) values(j, i) = out(0, j * h + i) + b2;
  return values;
}

// ---------------------------------------------------------------------------
// Receiver

ReceiverAgent::ReceiverAgent(const World& world, const AgentConfig& config, Rng& rng)
    : world_(&world), config_(config) {
  config_.validate();
  const Index n = world.n();
  const Index h = world.hypotheses();
  const auto id = identity_decoder(n);
  trunk_ = nn::DenseLayer("rx.trunk", id.weights, id.bias, nn::Activation::identity);
  policy_ = nn::Mlp("rx.policy", {policy_width(world), config.policy_hidden, world.alphabet()},
                    nn::Activation::tanh, nn::Init::zero, rng);
  partner_ = nn::Mlp("rx.partner", {2 * h + 1, config.partner_hidden, 1}, nn::Activation::tanh, nn::Init::zero, rng);
  tracker_ = BeliefTracker("rx.tracker", 2 * h + world.alphabet() + 2, config.tracker_hidden, h, rng);
  set_profile(world.profiles.front());
}

void ReceiverAgent::set_profile(const ReceiverProfile& profile) {
  if (profile.dialect.size() != world_->n()) {
    throw DimensionError(concat("receiver profile dialect has ", profile.dialect.size(), " entries for ",
                                world_->n(), " variables"));
  }
  profile_ = profile;
  belief_ = uniform_belief(world_->hypotheses());
  hidden_ = Vec::Zero(tracker_.hidden_dim());
  tracked_ = tracker_.predict(hidden_);
  begin_episode();
}

void ReceiverAgent::begin_episode() { previous_ = Vec::Zero(world_->n()); }

Vec ReceiverAgent::decoder_input(const Vec& s_hat, const std::vector<Index>& indices) const {
  return agents::decoder_input(profile_.dialect, indices, s_hat, previous_);
}

Vec ReceiverAgent::decode(const Vec& s_hat, const std::vector<Index>& indices) {
  previous_ = decode_state(decoder_weights(), profile_.dialect, indices, s_hat, previous_);
  return previous_;
}

Mat policy_aux(const World& w, int task) {
  if (task < 0 || task >= w.tasks()) fail("policy: task ", task, " outside [0, ", w.tasks(), ")");
  Mat x = Mat::Zero(w.k(), 1 + w.tasks() + w.k());
  for (Index c = 0; c < w.k(); ++c) {
    x(c, 0) = static_cast<double>(w.est_parents[static_cast<std::size_t>(c)]) / w.alphabet();
    x(c, 1 + task) = 1.0;
    x(c, 1 + w.tasks() + c) = 1.0;
  }
  return x;
}

Index policy_width(const World& w) { return 2 + w.tasks() + w.k(); }

Mat ReceiverAgent::policy_features(const Vec& z_hat_full, int task) const {
  const World& w = *world_;
  Mat x(w.k(), policy_width(w));
  for (Index c = 0; c < w.k(); ++c) x(c, 0) = z_hat_full[w.retained[static_cast<std::size_t>(c)]];
  x.rightCols(x.cols() - 1) = policy_aux(w, task);
  return x;
}

semantic::ActionDistribution ReceiverAgent::policy(const Vec& z_hat_full) const {
  const Mat logits = policy_.apply_batch(policy_features(z_hat_full, profile_.task));
  semantic::ActionDistribution out;
  out.reserve(static_cast<std::size_t>(logits.rows()));
  for (Index c = 0; c < logits.rows(); ++c) out.push_back(nn::softmax(logits.row(c).transpose()));
  return out;
}

std::vector<int> ReceiverAgent::act(const semantic::ActionDistribution& policy, Rng& rng) const {
  std::vector<int> out;
  out.reserve(policy.size());
  for (const auto& p : policy) out.push_back(static_cast<int>(encode_semantic(p, SelectMode::sample, &rng)));
  return out;
}

Vec ReceiverAgent::partner_features(Index m, double cqi_db) const {
  const Index h = world_->hypotheses();
  Vec x = Vec::Zero(2 * h + 1);
  x[m] = 1.0;
  x[h + profile_.id] = 1.0;
  x[2 * h] = cqi_db / 20.0;
  return x;
}

double ReceiverAgent::success_probability(Index m, double cqi_db) const {
  const double logit = partner_.apply(partner_features(m, cqi_db))[0];
  return 1.0 / (1.0 + std::exp(-logit));
}

Vec ReceiverAgent::tracker_input(const std::vector<int>& actions, double d, double cqi_db) const {
  const Index h = world_->hypotheses();
  const int a = world_->alphabet();
  Vec x = Vec::Zero(2 * h + a + 2);
  x.head(h) = tracked_;
  for (int act : actions) x[h + act] += 1.0 / static_cast<double>(actions.size());
  x[h + a] = d;
  x[h + a + 1] = cqi_db / 20.0;
  x[h + a + 2 + profile_.id] = 1.0;
  return x;
}

Vec ReceiverAgent::observe(bool success, const std::vector<int>& actions, double d, double cqi_db) {
  if (!config_.tom) return {};
  const Index h = world_->hypotheses();
  Vec lik(h);
  for (Index m = 0; m < h; ++m) {
    const double p = success_probability(m, cqi_db);
    lik[m] = success ? p : 1.0 - p;
  }
  belief_ = update_belief(belief_, lik, config_.belief);
  Vec input = tracker_input(actions, d, cqi_db);
  tracked_ = tracker_.step(input, hidden_);
  return input;
}

DecoderWeights ReceiverAgent::decoder_weights() const {
  return {trunk_.weights().value(), trunk_.bias().value().row(0).transpose()};
}

nn::ParameterList ReceiverAgent::network_parameters() {
  nn::ParameterList out = trunk_.parameters();
  for (auto* p : policy_.parameters()) out.push_back(p);
  return out;
}

nn::ParameterList ReceiverAgent::parameters() {
  nn::ParameterList out = network_parameters();
  for (auto* p : partner_.parameters()) out.push_back(p);
  for (auto* p : tracker_.parameters()) out.push_back(p);
  return out;
}

std::vector<ReceiverSnapshot> ReceiverAgent::snapshot_library() const {
  std::vector<ReceiverSnapshot> lib;
  const DecoderWeights dec = decoder_weights();
  for (const auto& p : world_->profiles) lib.push_back({p, dec});
  return lib;
}

double pretrain_receiver_policy(ReceiverAgent& rx, int steps, double learning_rate, Rng& rng) {
  const World& w = rx.world();
  nn::Optimizer opt(rx.policy_net().parameters(), {nn::OptimizerKind::adam});
  const Index batch = 64;
  const Index k = w.k();
  std::uniform_int_distribution<Index> pick(0, w.train_stream.rows() - 1);
  std::uniform_int_distribution<int> task_pick(0, w.tasks() - 1);
  double last = 0.0;
  for (int s = 0; s < steps; ++s) {
    Mat x(batch * k, policy_width(w));
    Mat target(batch * k, w.alphabet());
    for (Index b = 0; b < batch; ++b) {
      const Vec obs = w.train_stream.row(pick(rng)).transpose();
      const int task = task_pick(rng);
      Vec full = Vec::Zero(w.n());
      for (Index v : w.retained) full[v] = obs[v];
      x.middleRows(b * k, k) = rx.policy_features(full, task);
      const auto ideal = w.ideal(w.state(obs), task);
      for (Index c = 0; c < k; ++c) target.row(b * k + c) = ideal[static_cast<std::size_t>(c)].transpose();
    }
    nn::Tape tape;
    opt.zero_grad();
    nn::Var logp = nn::log_softmax_rows(rx.policy_net().forward(tape, tape.constant(x)));
    nn::Var loss = nn::scale(nn::sum(tape.constant(target) * logp), -1.0 / static_cast<double>(x.rows()));
    tape.backward(loss);
    opt.step(learning_rate);
    last = loss.scalar();
  }
  return last;
}

// ---------------------------------------------------------------------------
// Transmitter

TransmitterAgent::TransmitterAgent(const World& world, const AgentConfig& config, Rng& rng)
    : world_(&world), config_(config) {
  config_.validate();
  const Index h = world.hypotheses();
  const Index c = config.anchors + 1;
  codebook_ = nn::Parameter("tx.codebook", Mat::Zero(config.anchors, world.n()));
  q_ = nn::Mlp("tx.q", {3 + c + h, config.q_hidden, 1}, nn::Activation::relu, nn::Init::zero, rng);
  Rng copy_rng(0);
  q_target_ = nn::Mlp("tx.q_target", {3 + c + h, config.q_hidden, 1}, nn::Activation::relu, nn::Init::zero, copy_rng);
  nn::copy_values(q_.parameters(), q_target_.parameters());
  partner_ = nn::Mlp("tx.partner", {policy_width(world) + 1, config.partner_hidden, world.alphabet()},
                     nn::Activation::tanh, nn::Init::zero, rng);
  tracker_ = BeliefTracker("tx.tracker", 2 * h + c + 2, config.tracker_hidden, h, rng);
  reset_partner();
  begin_episode(0.0);
}

void TransmitterAgent::register_library(std::vector<ReceiverSnapshot> library) {
  const World& w = *world_;
  if (static_cast<Index>(library.size()) != w.hypotheses()) {
    fail("transmitter: library has ", library.size(), " snapshots, expected ", w.hypotheses());
  }
  library_ = std::move(library);
  const Index n = w.n();
  const Index k = w.k();
  const Index h = hypotheses();
  const Index fitted = std::min<Index>(h, config_.anchors);
  const Index samples = std::min<Index>(2000, w.train_stream.rows() - 1);
  Mat anchors = Mat::Zero(config_.anchors, n);
  for (Index i = 0; i < fitted; ++i) {
    const auto& snap = library_[static_cast<std::size_t>(i)];
    Mat a(k, k);
    Mat g(k, k);
    Vec bias(k);
    Vec dialect(k);
    for (Index r = 0; r < k; ++r) {
      const Index vr = w.retained[static_cast<std::size_t>(r)];
      bias[r] = snap.decoder.bias[vr];
      dialect[r] = snap.profile.dialect[vr];
      for (Index c = 0; c < k; ++c) {
        const Index vc = w.retained[static_cast<std::size_t>(c)];
        a(r, c) = snap.decoder.weights(vr, vc);
        g(r, c) = snap.decoder.weights(vr, n + vc);
      }
    }
    Vec resid = Vec::Zero(k);
    for (Index t = 1; t <= samples; ++t) {
      const Vec z = w.state(w.train_stream.row(t).transpose());
      const Vec prev = w.state(w.train_stream.row(t - 1).transpose());
      resid += a * z + g * prev + bias - z;
    }
    resid /= static_cast<double>(samples);
    resid -= a * dialect;
    const Vec c = a.colPivHouseholderQr().solve(-resid);
    for (Index r = 0; r < k; ++r) anchors(i, w.retained[static_cast<std::size_t>(r)]) = c[r];
  }
  for (Index i = fitted; i < config_.anchors; ++i) {
    const Index pair = i - fitted;
    const Index first = pair % fitted;
    const Index second = (first + 1 + pair / fitted) % fitted;
    anchors.row(i) = 0.5 * (anchors.row(first) + anchors.row(second));
  }
  codebook_.set_value(anchors);
  simulated_previous_.assign(static_cast<std::size_t>(h), Vec::Zero(n));
}

Vec TransmitterAgent::candidate(const Vec& z, Index j) const {
  const World& w = *world_;
  if (j < 0 || j >= candidates()) fail("transmitter: candidate ", j, " out of range");
  Vec s = z;
  if (j < codebook_.rows()) {
    for (Index c = 0; c < w.k(); ++c) s[c] += codebook_.value()(j, w.retained[static_cast<std::size_t>(c)]);
  }
  const double r = config_.quantizer.range;
  return s.cwiseMax(-r).cwiseMin(r);
}

void TransmitterAgent::reset_partner() {
  const Index h = world_->hypotheses();
  belief_ = uniform_belief(h);
  hidden_ = Vec::Zero(tracker_.hidden_dim());
  tracked_ = tracker_.predict(hidden_);
}

void TransmitterAgent::begin_episode(double cqi_db) {
  d_prev_ = 1.0;
  p_prev_ = cqi_db;
  simulated_previous_.assign(static_cast<std::size_t>(world_->hypotheses()), Vec::Zero(world_->n()));
}

TransmitterAgent::Plan TransmitterAgent::plan(const Vec& z, double beta) const { return plan(z, beta, q_); }

TransmitterAgent::Plan TransmitterAgent::plan(const Vec& z, double beta, const nn::Mlp& q) const {
  if (library_.empty()) fail("transmitter: no receiver library registered");
  const World& w = *world_;
  const Index c = candidates();
  const Index h = hypotheses();
  Plan p;
  p.bits = config_.quantizer.select_bits(p_prev_);
  p.context.distortion.resize(c, h);
  p.context.d_prev = d_prev_;
  p.context.p_prev = p_prev_;
  p.context.tracked = tracked_;
  p.context.belief = belief_.weights;
  p.simulated.reserve(static_cast<std::size_t>(c));
  p.symbols.reserve(static_cast<std::size_t>(c));
  const Index n = w.n();
  Mat embedded = Mat::Zero(c, n);
  for (Index j = 0; j < c; ++j) {
    Vec s = requantize(candidate(z, j), p.bits, config_.quantizer.range);
    for (Index r = 0; r < w.k(); ++r) embedded(j, w.retained[static_cast<std::size_t>(r)]) = s[r];
    p.symbols.push_back(std::move(s));
    p.simulated.emplace_back(h, n);
  }
  Mat mask = Mat::Zero(n, n);
  Vec z_full = Vec::Zero(n);
  for (Index r = 0; r < w.k(); ++r) {
    const Index v = w.retained[static_cast<std::size_t>(r)];
    mask(v, v) = 1.0;
    z_full[v] = z[r];
  }
  for (Index i = 0; i < h; ++i) {
    const auto& snap = library_[static_cast<std::size_t>(i)];
    const Mat w_in = snap.decoder.weights.leftCols(n) * mask;
    Vec base = snap.decoder.bias - w_in * snap.profile.dialect +
               snap.decoder.weights.rightCols(n) * simulated_previous_[static_cast<std::size_t>(i)];
    const Mat dec = ((embedded * w_in.transpose()).rowwise() + base.transpose()) * mask;
    for (Index j = 0; j < c; ++j) {
      p.simulated[static_cast<std::size_t>(j)].row(i) = dec.row(j);
      p.context.distortion(j, i) = (dec.row(j).transpose() - z_full).squaredNorm();
    }
  }
  p.q = q_values(q, p.context, config_.delta);
  p.policy = transmitter_policy(p.q, belief_.weights, beta);
  return p;
}

Mat TransmitterAgent::partner_features(const Vec& decoded_full, int task, double cqi_db) const {
  const World& w = *world_;
  Mat x(w.k(), policy_width(w) + 1);
  for (Index c = 0; c < w.k(); ++c) x(c, 0) = decoded_full[w.retained[static_cast<std::size_t>(c)]];
  x.middleCols(1, policy_width(w) - 1) = policy_aux(w, task);
  x.col(x.cols() - 1).setConstant(cqi_db / 20.0);
  return x;
}

Vec TransmitterAgent::action_log_likelihoods(const Plan& plan, Index j, const std::vector<int>& actions,
                                             double cqi_db) const {
  const World& w = *world_;
  if (static_cast<Index>(actions.size()) != w.k()) {
    throw DimensionError(concat("transmitter: observed ", actions.size(), " actions for ", w.k(), " components"));
  }
  const Index h = hypotheses();
  Vec out(h);
  for (Index i = 0; i < h; ++i) {
    const Vec dec = plan.simulated[static_cast<std::size_t>(j)].row(i).transpose();
    const Mat logits =
        partner_.apply_batch(partner_features(dec, library_[static_cast<std::size_t>(i)].profile.task, cqi_db));
    double ll = 0.0;
    for (Index c = 0; c < w.k(); ++c) ll += nn::log_softmax(logits.row(c).transpose())[actions[static_cast<std::size_t>(c)]];
    out[i] = ll;
  }
  return out;
}

Vec TransmitterAgent::tracker_input(Index j, double d, double cqi_db) const {
  const Index h = hypotheses();
  const Index c = candidates();
  Vec x = Vec::Zero(2 * h + c + 2);
  x.head(h) = tracked_;
  x[h + j] = 1.0;
  x[h + c] = d;
  x[h + c + 1] = cqi_db / 20.0;
  x.tail(h) = belief_.weights;
  return x;
}

Vec TransmitterAgent::observe(const Plan& plan, Index j, const std::vector<int>& actions, double d, double cqi_db) {
  Vec input;
  if (config_.tom) {
    belief_ = update_belief_log(belief_, action_log_likelihoods(plan, j, actions, plan.context.p_prev), config_.belief);
    input = tracker_input(j, d, cqi_db);
    tracked_ = tracker_.step(input, hidden_);
  }
  const Mat& sim = plan.simulated[static_cast<std::size_t>(j)];
  for (Index i = 0; i < hypotheses(); ++i) simulated_previous_[static_cast<std::size_t>(i)] = sim.row(i).transpose();
  d_prev_ = d;
  p_prev_ = cqi_db;
  return input;
}

void TransmitterAgent::sync_target() { nn::copy_values(q_.parameters(), q_target_.parameters()); }

nn::ParameterList TransmitterAgent::parameters() {
  nn::ParameterList out = q_.parameters();
  for (auto* p : partner_.parameters()) out.push_back(p);
  for (auto* p : tracker_.parameters()) out.push_back(p);
  return out;
}

nn::Checkpoint TransmitterAgent::checkpoint() {
  nn::ParameterList all = parameters();
  for (auto* p : q_target_.parameters()) all.push_back(p);
  all.push_back(&codebook_);
  nn::Checkpoint ck = nn::Checkpoint::capture(all);
  ck.meta["tom"] = config_.tom ? "1" : "0";
  std::string ids;
  for (const auto& s : library_) {
    const std::string key = concat("library.", s.profile.id);
    ck.params[key + ".W"] = s.decoder.weights;
    ck.params[key + ".b"] = s.decoder.bias;
    ck.params[key + ".dialect"] = s.profile.dialect;
    ck.meta[key + ".task"] = std::to_string(s.profile.task);
    ids += (ids.empty() ? "" : ",") + std::to_string(s.profile.id);
  }
  ck.meta["library"] = ids;
  return ck;
}

void TransmitterAgent::restore(const nn::Checkpoint& ck) {
  std::vector<ReceiverSnapshot> lib;
  for (const auto& prof : world_->profiles) {
    const std::string key = concat("library.", prof.id);
    auto w = ck.params.find(key + ".W");
    auto b = ck.params.find(key + ".b");
    auto dl = ck.params.find(key + ".dialect");
    auto task = ck.meta.find(key + ".task");
    if (w == ck.params.end() || b == ck.params.end() || dl == ck.params.end() || task == ck.meta.end()) {
      fail("transmitter checkpoint: missing library snapshot ", prof.id);
    }
    ReceiverSnapshot s;
    s.profile = {prof.id, dl->second.col(0), std::stoi(task->second)};
    s.decoder = {w->second, b->second.col(0)};
    lib.push_back(std::move(s));
  }
  library_ = std::move(lib);
  nn::ParameterList all = parameters();
  for (auto* p : q_target_.parameters()) all.push_back(p);
  all.push_back(&codebook_);
  ck.restore(all);
  simulated_previous_.assign(static_cast<std::size_t>(world_->hypotheses()), Vec::Zero(world_->n()));
}

}  // namespace tomsc::agents
