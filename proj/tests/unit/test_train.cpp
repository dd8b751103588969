#include <doctest.h>

#include "tomsc/nn/optim.hpp"
#include "tomsc/phy/link.hpp"
#include "tomsc/train/losses.hpp"
#include "tomsc/train/online.hpp"
#include "tomsc/train/trainer.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

using namespace tomsc;
using namespace tomsc::train;

namespace {

const agents::World& shared_world() {
  static const agents::World w = agents::build_world(agents::WorldConfig{}, 5);
  return w;
}

TrainConfig quick_config() {
  TrainConfig c;
  c.rounds = 4;
  c.batch = 2;
  c.horizon = 4;
  c.optimizer = nn::OptimizerKind::adam;
  c.step_size = 1e-3;
  c.eta_q = c.eta_pi = c.eta_f = 1.0;
  return c;
}

std::vector<Mat> values_of(const nn::ParameterList& ps) {
  std::vector<Mat> out;
  for (const auto* p : ps) out.push_back(p->value());
  return out;
}

}  // namespace

TEST_CASE("q target examples") {
  CHECK(q_target(0.3, 5.0, 0.0, false) == 0.3);
  CHECK(q_target(0.3, 5.0, 0.9, true) == 0.3);
  CHECK(q_target(0.5, 1.0, 0.9, false) == doctest::Approx(1.4).epsilon(1e-15));
}

TEST_CASE("q loss examples and gradient") {
  nn::Tape t;
  CHECK(loss_q(t.constant(Mat::Constant(3, 1, 0.4)), Vec::Constant(3, 0.4)).scalar() == 0.0);
  CHECK(loss_q(t.constant(Mat::Constant(1, 1, 1.0)), Vec::Zero(1)).scalar() == 1.0);
  CHECK_THROWS_AS(loss_q(t.constant(Mat(0, 1)), Vec(0)), Error);

  nn::Parameter q("q", Mat::Random(6, 1));
  const Vec y = Vec::Random(6);
  q.zero_grad();
  {
    nn::Tape tape;
    tape.backward(loss_q(tape.param(q), y));
  }
  for (Index i = 0; i < 6; ++i) {
    const double fd = 2.0 * (q.value()(i, 0) - y[i]) / 6.0;
    CHECK(q.grad()(i, 0) == doctest::Approx(fd).epsilon(1e-10));
    Mat d = Mat::Zero(6, 1);
    d(i, 0) = 1e-5;
    auto eval = [&] {
      nn::Tape tape;
      return loss_q(tape.param(q), y).scalar();
    };
    q.apply_delta(d);
    const double up = eval();
    q.apply_delta(-2.0 * d);
    const double down = eval();
    q.apply_delta(d);
    CHECK(std::abs((up - down) / 2e-5 - q.grad()(i, 0)) < 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("partner policy loss examples") {
  Mat onehot = Mat::Zero(2, 4);
  onehot(0, 1) = 1.0;
  onehot(1, 3) = 1.0;
  CHECK(partner_policy_nll(onehot, {1, 3}) == 0.0);
  CHECK(partner_policy_nll(Mat::Constant(3, 4, 0.25), {0, 2, 3}) == doctest::Approx(std::log(4.0)).epsilon(1e-14));
  long clamped = 0;
  const double nll = partner_policy_nll(onehot, {0, 3}, &clamped);
  CHECK(clamped == 1);
  CHECK(nll == doctest::Approx(-std::log(1e-12) / 2.0));
  nn::Tape t;
  CHECK(loss_partner_policy(t.constant(Mat::Constant(2, 4, std::log(0.25))), {0, 1}).scalar() ==
        doctest::Approx(std::log(4.0)));
}

TEST_CASE("belief loss examples") {
  const Index h = 8;
  const double floor = 1e-6;
  Mat target = Mat::Constant(1, h, floor);
  target(0, 2) = 1.0 - floor * (h - 1);
  nn::Tape t;
  CHECK(loss_belief(t.constant(target.array().log().matrix()), target).scalar() == doctest::Approx(0.0).epsilon(1e-15));
  double kl = 0.0;
  for (Index i = 0; i < h; ++i) kl += target(0, i) * std::log(target(0, i) * h);
  const double uniform = loss_belief(t.constant(Mat::Constant(1, h, -std::log(static_cast<double>(h)))), target).scalar();
  CHECK(uniform == doctest::Approx(kl).epsilon(1e-12));
  CHECK(std::abs(uniform - std::log(static_cast<double>(h))) < 1e-3);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    Mat logits = Mat::Random(3, 5) * 4.0;
    Mat tgt = Mat::Random(3, 5).array().abs() + 1e-3;
    for (Index r = 0; r < 3; ++r) tgt.row(r) /= tgt.row(r).sum();
    nn::Tape tape;
    CHECK(loss_belief(nn::log_softmax_rows(tape.constant(logits)), tgt).scalar() >= -1e-15);
  }
}

TEST_CASE("replay buffer") {
  ReplayBuffer<int> buf(4);
  for (int i = 0; i < 10; ++i) {
    buf.add(i);
    CHECK(buf.size() <= 4);
  }
  CHECK(buf.inserted() == 10);
  std::multiset<int> kept;
  for (std::size_t i = 0; i < buf.size(); ++i) kept.insert(buf.at(i));
  CHECK(kept == std::multiset<int>{6, 7, 8, 9});

  Rng a(17), b(17);
  std::vector<int> sa, sb;
  for (const int* p : buf.sample(50, a)) sa.push_back(*p);
  for (const int* p : buf.sample(50, b)) sb.push_back(*p);
  CHECK(sa == sb);

  std::map<int, int> hits;
  Rng rng(18);
  for (const int* p : buf.sample(10000, rng)) ++hits[*p];
  CHECK(hits.size() == 4);
  for (const auto& [v, n] : hits) CHECK(std::abs(n - 2500) < 250);

  CHECK_THROWS_AS(ReplayBuffer<int>(0), Error);
  ReplayBuffer<int> empty(2);
  CHECK_THROWS_AS(empty.sample(1, rng), Error);
}

TEST_CASE("collected episodes have the configured length and are reproducible") {
  const auto& w = shared_world();
  for (int horizon : {1, 5}) {
    Rng r1(21), r2(21);
    agents::TransmitterAgent tx1(w, agents::AgentConfig{}, r1), tx2(w, agents::AgentConfig{}, r2);
    agents::ReceiverAgent rx1(w, agents::AgentConfig{}, r1), rx2(w, agents::AgentConfig{}, r2);
    tx1.register_library(rx1.snapshot_library());
    tx2.register_library(rx2.snapshot_library());
    phy::FadingLink l1(10.0), l2(10.0);
    StepSettings s;
    const auto a = collect_episode(tx1, rx1, l1, w.train_stream, 7, horizon, s, r1);
    const auto b = collect_episode(tx2, rx2, l2, w.train_stream, 7, horizon, s, r2);
    REQUIRE(a.steps.size() == static_cast<std::size_t>(horizon));
    for (std::size_t i = 0; i < a.steps.size(); ++i) {
      CHECK(a.steps[i].candidate == b.steps[i].candidate);
      CHECK(a.steps[i].actions == b.steps[i].actions);
      CHECK(a.steps[i].d == b.steps[i].d);
      CHECK(a.steps[i].d > 0.0);
      CHECK(a.steps[i].d <= 1.0);
      CHECK(std::isfinite(a.steps[i].reward));
    }
  }
}

TEST_CASE("one symbol per step on a noiseless link") {
  const auto& w = shared_world();
  Rng rng(22);
  agents::TransmitterAgent tx(w, agents::AgentConfig{}, rng);
  agents::ReceiverAgent rx(w, agents::AgentConfig{}, rng);
  tx.register_library(rx.snapshot_library());
  phy::NoiselessLink link(30.0);
  const auto transport = baselines::plain_transport(link);
  tx.reset_partner();
  tx.begin_episode(30.0);
  rx.begin_episode();
  const auto log = run_step(tx, rx, transport, w.eval_stream.row(3).transpose(), StepSettings{}, rng);
  CHECK(log.bits_sent == w.k() * log.bits_per_dim);
  CHECK(static_cast<long>(log.channel_uses) == log.bits_sent);
  CHECK(log.d == doctest::Approx(semantic::quantize_feedback(semantic::feedback(log.c_t).d)));
}

TEST_CASE("total loss is the eta-weighted sum") {
  const auto& w = shared_world();
  Rng rng(23);
  agents::TransmitterAgent tx(w, agents::AgentConfig{}, rng);
  agents::ReceiverAgent rx(w, agents::AgentConfig{}, rng);
  tx.register_library(rx.snapshot_library());
  TrainConfig c = quick_config();
  c.eta_q = 0.3;
  c.eta_pi = 0.02;
  c.eta_f = 0.7;
  c.eta_p2 = 0.11;
  std::vector<Trajectory> trajs;
  for (int i = 0; i < 2; ++i) trajs.push_back(collect_training_episode(tx, rx, c, 1.0, rng));
  const std::vector<const Trajectory*> batch{&trajs[0], &trajs[1]};
  {
    nn::Tape t;
    const auto l = transmitter_losses(t, tx, batch, c);
    REQUIRE(l.pi.valid());
    REQUIRE(l.f.valid());
    CHECK(l.total.scalar() == 0.3 * l.q.scalar() + 0.02 * l.pi.scalar() + 0.7 * l.f.scalar());
  }
  {
    nn::Tape t;
    const auto l = receiver_losses(t, rx, batch, c);
    double expect = 0.11 * l.q.scalar();
    if (l.pi.valid()) expect += 0.02 * l.pi.scalar();
    if (l.f.valid()) expect += 0.7 * l.f.scalar();
    CHECK(l.total.scalar() == expect);
  }
}

TEST_CASE("zero learning rates leave parameters unchanged") {
  const auto& w = shared_world();
  Rng rng(24);
  agents::TransmitterAgent tx(w, agents::AgentConfig{}, rng);
  agents::ReceiverAgent rx(w, agents::AgentConfig{}, rng);
  tx.register_library(rx.snapshot_library());
  TrainConfig c = quick_config();
  c.optimizer = nn::OptimizerKind::sgd;
  c.rounds = 1;
  c.batch = 1;
  c.eta_q = c.eta_pi = c.eta_f = 0.0;
  c.eta_p2 = 0.0;
  const auto before_tx = values_of(tx.parameters());
  const auto before_rx = values_of(rx.parameters());
  train::train(tx, rx, c, rng);
  CHECK(values_of(tx.parameters()) == before_tx);
  CHECK(values_of(rx.parameters()) == before_rx);
}

TEST_CASE("training is reproducible and the target only moves at syncs") {
  const auto& w = shared_world();
  auto run = [&](int rounds, int sync) {
    Rng rng(25);
    agents::TransmitterAgent tx(w, agents::AgentConfig{}, rng);
    agents::ReceiverAgent rx(w, agents::AgentConfig{}, rng);
    tx.register_library(rx.snapshot_library());
    TrainConfig c = quick_config();
    c.rounds = rounds;
    c.sync_period = sync;
    const auto target0 = values_of(tx.q_target().parameters());
    const auto reports = train::train(tx, rx, c, rng);
    return std::make_tuple(reports, target0, values_of(tx.q_target().parameters()), values_of(tx.q_parameters()));
  };
  const auto [rep_a, t0a, ta, qa] = run(4, 100);
  const auto [rep_b, t0b, tb, qb] = run(4, 100);
  REQUIRE(rep_a.size() == rep_b.size());
  for (std::size_t i = 0; i < rep_a.size(); ++i) {
    CHECK(rep_a[i].round == static_cast<int>(i));
    CHECK(rep_a[i].agent == (i % 2 == 0 ? "tx" : "rx"));
    CHECK(rep_a[i].total == rep_b[i].total);
    CHECK(rep_a[i].mean_d == rep_b[i].mean_d);
  }
  CHECK(ta == t0a);
  CHECK(qa != ta);
  const auto [rep_c, t0c, tc, qc] = run(2, 2);
  CHECK(tc == qc);
}

TEST_CASE("loss csv") {
  const auto path = std::filesystem::temp_directory_path() / "tomsc_loss_test.csv";
  write_loss_csv({LossReport{0, "tx", 1.0, 2.0, 3.0, 6.0, 0.5, 0.7}}, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "round,agent,L_Q,L_pi,L_f,mean_d,mean_Ct");
  std::filesystem::remove(path);
}

TEST_CASE("q learning picks the better arm of a two-armed bandit") {
  int correct = 0;
  for (int seed = 0; seed < 50; ++seed) {
    Rng rng(static_cast<std::uint64_t>(1000 + seed));
    nn::Parameter q("q", Mat::Zero(2, 1));
    nn::Parameter target("qt", Mat::Zero(2, 1));
    nn::Optimizer opt({&q}, nn::OptimizerConfig{});
    const double reward[2] = {0.3, 0.6};
    for (int step = 0; step < 300; ++step) {
      const Vec pol = agents::transmitter_policy(q.value(), Vec::Ones(1), 2.0);
      const Index a = agents::encode_semantic(pol, agents::SelectMode::sample, &rng);
      const double r = reward[a] + 0.1 * standard_normal(rng);
      const double y = q_target(r, target.value().maxCoeff(), 0.0, true);
      nn::Tape t;
      const nn::Var chosen = nn::slice_rows(t.param(q), a, 1);
      opt.zero_grad();
      t.backward(loss_q(chosen, Vec::Constant(1, y)));
      opt.step(0.1);
      if (step % 10 == 9) target.set_value(q.value());
    }
    correct += agents::encode_semantic(agents::transmitter_policy(q.value(), Vec::Ones(1), 2.0),
                                       agents::SelectMode::greedy) == 1;
  }
  CHECK(correct >= 48);
}

TEST_CASE("training improves feedback on a two-variable scenario") {
  agents::WorldConfig wc;
  wc.variables = 2;
  wc.alphabet = 3;
  wc.density = 1.0;
  wc.hypotheses = 2;
  const auto w = agents::build_world(wc, 1);
  Rng rng(26);
  agents::ReceiverAgent rx(w, agents::AgentConfig{}, rng);
  agents::TransmitterAgent tx(w, agents::AgentConfig{}, rng);
  tx.register_library(rx.snapshot_library());
  TrainConfig c;
  c.optimizer = nn::OptimizerKind::adam;
  c.step_size = 3e-3;
  c.eta_q = c.eta_pi = c.eta_f = 1.0;
  c.batch = 10;
  c.horizon = 8;
  c.rounds = 40;
  c.updates_per_round = 4;
  c.snr_db = {20.0};
  const auto reports = train::train(tx, rx, c, rng);
  // Ten episodes per round: the first and last ten rounds each cover 100 episodes.
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 10; ++i) {
    early += reports[static_cast<std::size_t>(i)].mean_d;
    late += reports[reports.size() - 1 - static_cast<std::size_t>(i)].mean_d;
  }
  CHECK(late > early);
}

TEST_CASE("recovery windows") {
  const std::vector<double> d{1, 1, 1, 1, 0.2, 0.5, 0.95, 1};
  CHECK(recovery_windows(d, 4, 4) == 2);
  CHECK(recovery_windows(d, 4, 4, 0.4) == 1);
  CHECK(recovery_windows({1, 1, 0.1, 0.1}, 2, 2) == -1);
  CHECK(recovery_windows({1, 1, 1, 1}, 2, 2) == 0);
  CHECK_THROWS_AS(recovery_windows(d, 2, 4), Error);
}
