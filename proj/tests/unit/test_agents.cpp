#include <doctest.h>

#include "tomsc/agents/agents.hpp"
#include "tomsc/agents/objective.hpp"
#include "tomsc/nn/prob.hpp"

#include <cmath>

using namespace tomsc;
using namespace tomsc::agents;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

const World& shared_world() {
  static const World w = build_world(WorldConfig{}, 3);
  return w;
}

Vec random_simplex(Index n, Rng& rng) {
  std::gamma_distribution<double> g(0.8, 1.0);
  Vec p(n);
  for (Index i = 0; i < n; ++i) p[i] = g(rng) + 1e-9;
  return p / p.sum();
}

}  // namespace

TEST_CASE("transmitter policy examples") {
  CHECK(transmitter_policy(Mat::Constant(4, 3, 0.7), vec({0.2, 0.3, 0.5}), 5.0).isApprox(Vec::Constant(4, 0.25)));
  Mat q(3, 2);
  q << 1.0, -2.0, 0.5, 3.0, -1.0, 0.0;
  const Vec cold = transmitter_policy(q, vec({0.4, 0.6}), 1e-9);
  CHECK((cold.array() - 1.0 / 3.0).abs().maxCoeff() < 1e-6);
  Mat q2(2, 1);
  q2 << 1.0, 0.0;
  const Vec p = transmitter_policy(q2, vec({1.0}), 1.0);
  const double e = std::exp(1.0);
  CHECK(p[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
  CHECK(p[0] == doctest::Approx(0.7311).epsilon(1e-4));
  CHECK_THROWS_AS(transmitter_policy(Mat(0, 2), vec({0.5, 0.5}), 1.0), Error);
}

TEST_CASE("transmitter policy is invariant to a constant Q shift") {
  Rng rng(4);
  for (int t = 0; t < 100; ++t) {
    Mat q = Mat::Random(5, 3);
    const Vec b = random_simplex(3, rng);
    const Vec p = transmitter_policy(q, b, 3.0);
    const Vec s = transmitter_policy((q.array() - 2.5).matrix(), b, 3.0);
    CHECK((p - s).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("belief update examples") {
  const BeliefOptions plain{0.0};
  CHECK(update_belief(uniform_belief(2), vec({0.8, 0.2}), plain).weights.isApprox(vec({0.8, 0.2}), 1e-12));
  const Belief prior{vec({0.9, 0.1}), 0};
  CHECK(update_belief(prior, vec({0.5, 0.5}), plain).weights.isApprox(prior.weights, 1e-12));
  CHECK(update_belief(prior, vec({0.3, 0.3})).weights.isApprox(prior.weights, 1e-12));
  CHECK_THROWS_WITH_AS(update_belief(prior, vec({0.0, 0.0})), doctest::Contains("belief collapse"), Error);
  CHECK(update_belief(prior, vec({0.5, 0.5})).step == 1);
}

TEST_CASE("belief update scale invariance, composition and floor") {
  Rng rng(5);
  const BeliefOptions plain{0.0};
  for (int t = 0; t < 200; ++t) {
    const Belief b{random_simplex(6, rng), 0};
    Vec l1 = Vec::Random(6).array().abs() + 0.01;
    Vec l2 = Vec::Random(6).array().abs() + 0.01;
    const Belief once = update_belief(b, l1, plain);
    CHECK(std::abs(once.weights.sum() - 1.0) < 1e-9);
    CHECK((update_belief(b, 13.0 * l1, plain).weights - once.weights).cwiseAbs().maxCoeff() < 1e-12);
    const Belief seq = update_belief(once, l2, plain);
    CHECK((seq.weights - update_belief(b, l1.cwiseProduct(l2), plain).weights).cwiseAbs().maxCoeff() < 1e-12);
    const Vec ll = l1.array().log();
    CHECK((update_belief_log(b, ll, plain).weights - once.weights).cwiseAbs().maxCoeff() < 1e-12);
    Vec spiky = Vec::Constant(6, 1e-300);
    spiky[2] = 1.0;
    const Belief floored = update_belief(b, spiky, BeliefOptions{1e-3});
    CHECK(floored.weights.minCoeff() >= 1e-3 - 1e-15);
    CHECK(std::abs(floored.weights.sum() - 1.0) < 1e-9);
  }
}

TEST_CASE("encode semantic") {
  CHECK(encode_semantic(vec({0.1, 0.7, 0.2}), SelectMode::greedy) == 1);
  CHECK(encode_semantic(vec({0.5, 0.5}), SelectMode::greedy) == 0);
  CHECK_THROWS_AS(encode_semantic(vec({0.5, 0.5}), SelectMode::sample), Error);
  const Vec p = vec({0.1, 0.6, 0.3});
  Rng rng(6);
  Vec counts = Vec::Zero(3);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) counts[encode_semantic(p, SelectMode::sample, &rng)] += 1.0;
  CHECK(((counts / draws) - p).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("belief tracker output") {
  Rng rng(7);
  BeliefTracker tracker("t", 4, 6, 5, rng);
  Vec hidden = Vec::Zero(6);
  CHECK(tracker.predict(hidden).isApprox(Vec::Constant(5, 0.2), 1e-12));
  for (int i = 0; i < 50; ++i) {
    const Vec out = tracker.step(Vec::Random(4) * 3.0, hidden);
    CHECK(std::abs(out.sum() - 1.0) < 1e-9);
    CHECK(out.minCoeff() > 0.0);
  }
}

TEST_CASE("quantizer examples") {
  for (int b : {1, 4, 8, 12}) {
    CHECK(std::abs(requantize(vec({0.0}), b, 2.0)[0]) <= quantizer_step(b, 2.0) / 2.0 + 1e-15);
  }
  const auto top = quantize(vec({1.0, -1.0}), 4, 1.0);
  REQUIRE(top.bits.size() == 8);
  for (int i = 0; i < 4; ++i) {
    CHECK(top.bits[static_cast<std::size_t>(i)] == 1);
    CHECK(top.bits[static_cast<std::size_t>(4 + i)] == 0);
  }
  Rng rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double x = u(rng);
    worst = std::max(worst, std::abs(x - requantize(vec({x}), 8, 1.0)[0]));
  }
  CHECK(worst <= 1.0 / 256.0);
  CHECK_THROWS_AS(quantize(vec({0.1}), 0, 1.0), Error);
  CHECK_THROWS_AS(quantize(vec({0.1}), 17, 1.0), Error);
}

TEST_CASE("cqi rate table") {
  const QuantizerConfig q;
  CHECK(q.select_bits(20.0) == 4);
  CHECK(q.select_bits(15.0) == 4);
  CHECK(q.select_bits(14.9) == 6);
  CHECK(q.select_bits(5.0) == 6);
  CHECK(q.select_bits(4.9) == 8);
  CHECK(q.select_bits(-10.0) == 8);
  const auto s = quantize_to_bits(vec({0.5, -0.5, 1.5}), 7.0, q);
  CHECK(s.bits_per_dim == 6);
  CHECK(s.bits.size() == 18);
}

TEST_CASE("identity decoder on a noiseless link keeps the state in the delta ball") {
  const Index n = 5;
  const std::vector<Index> idx{0, 2, 3};
  const auto id = identity_decoder(n);
  const Vec dialect = Vec::Zero(n);
  Rng rng(9);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  int inside = 0;
  const int trials = 2000;
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vec z(3);
    for (Index i = 0; i < 3; ++i) z[i] = u(rng);
    const Vec zhat = decode_state(id, dialect, idx, requantize(z, 8, 4.0), Vec::Random(n));
    REQUIRE(zhat.size() == n);
    const double e = (gather(zhat, idx) - z).squaredNorm();
    worst = std::max(worst, e);
    inside += e < 0.5;
  }
  CHECK(inside >= 0.99 * trials);
  const double half = 4.0 / 256.0;
  CHECK(worst <= 3.0 * half * half * 4.0);
}

TEST_CASE("receiver agent policy and decoding") {
  const World& w = shared_world();
  Rng rng(10);
  ReceiverAgent rx(w, AgentConfig{}, rng);
  for (const auto& p : rx.policy(Vec::Random(w.n()))) {
    CHECK(p.isApprox(Vec::Constant(w.alphabet(), 1.0 / w.alphabet()), 1e-12));
  }
  rx.policy_net().layers().back().bias().set_value(Mat::Random(1, w.alphabet()));
  for (int t = 0; t < 20; ++t) {
    const auto pol = rx.policy(Vec::Random(w.n()) * 5.0);
    REQUIRE(static_cast<Index>(pol.size()) == w.k());
    for (const auto& p : pol) CHECK(std::abs(p.sum() - 1.0) < 1e-9);
  }
  const Index k = w.k();
  for (double edge : {-4.0, 4.0, 1e6}) {
    const Vec z = rx.decode(Vec::Constant(k, edge), w.retained);
    CHECK(z.size() == w.n());
    CHECK(z.allFinite());
    CHECK(gather(z, w.retained).size() == k);
  }
}

TEST_CASE("pretraining beats the uniform policy") {
  const World& w = shared_world();
  Rng rng(11);
  ReceiverAgent rx(w, AgentConfig{}, rng);
  const double ce = pretrain_receiver_policy(rx, 600, 0.01, rng);
  CHECK(ce < std::log(static_cast<double>(w.alphabet())));
}

TEST_CASE("receiver objective examples") {
  Mat ideal(2, 3);
  ideal << 0.2, 0.5, 0.3, 0.6, 0.3, 0.1;
  P2Config cfg;
  cfg.lambda = 1.0;
  cfg.reliability = {0.5, 0.1};
  double h = 0.0;
  for (Index r = 0; r < 2; ++r) {
    for (Index a = 0; a < 3; ++a) h -= ideal(r, a) * std::log(ideal(r, a));
  }
  h /= 2.0;
  const double smooth = 1.0 / (1.0 + std::exp(-cfg.reliability.delta / cfg.kappa()));
  CHECK(receiver_objective(ideal, ideal, Vec::Zero(4), cfg) ==
        doctest::Approx(h + cfg.lambda * ((1.0 - 0.1) - smooth)).epsilon(1e-12));
  cfg.lambda = 0.0;
  CHECK(receiver_objective(ideal, ideal, Vec::Constant(4, 3.0), cfg) == doctest::Approx(h).epsilon(1e-12));
  cfg.lambda = -1.0;
  CHECK_THROWS_AS(receiver_objective(ideal, ideal, Vec::Zero(4), cfg), Error);
}

TEST_CASE("receiver objective gradient matches finite differences") {
  Rng rng(12);
  P2Config cfg;
  cfg.lambda = 0.7;
  for (int trial = 0; trial < 10; ++trial) {
    nn::Parameter logits("l", Mat::Random(3, 4));
    nn::Parameter dist("d", (Mat::Random(5, 1).array() * 0.1 + 0.5).matrix());
    Mat ideal(3, 4);
    for (Index r = 0; r < 3; ++r) ideal.row(r) = random_simplex(4, rng).transpose();
    auto eval = [&] {
      nn::Tape t;
      return receiver_objective(nn::log_softmax_rows(t.param(logits)), ideal, t.param(dist), cfg).scalar();
    };
    logits.zero_grad();
    dist.zero_grad();
    {
      nn::Tape t;
      t.backward(receiver_objective(nn::log_softmax_rows(t.param(logits)), ideal, t.param(dist), cfg));
    }
    for (nn::Parameter* p : {&logits, &dist}) {
      const Mat g = p->grad();
      for (Index i = 0; i < g.size(); ++i) {
        Mat d = Mat::Zero(g.rows(), g.cols());
        d.data()[i] = 1e-5;
        p->apply_delta(d);
        const double up = eval();
        p->apply_delta(-2.0 * d);
        const double down = eval();
        p->apply_delta(d);
        const double fd = (up - down) / 2e-5;
        CHECK(std::abs(fd - g.data()[i]) <= 1e-3 * std::max(1e-2, std::abs(fd)));
      }
    }
  }
}

TEST_CASE("q features and values have the documented shapes") {
  const World& w = shared_world();
  Rng rng(13);
  TransmitterAgent tx(w, AgentConfig{}, rng);
  ReceiverAgent rx(w, AgentConfig{}, rng);
  tx.register_library(rx.snapshot_library());
  CHECK(tx.hypotheses() == w.hypotheses());
  CHECK(tx.candidates() == AgentConfig{}.anchors + 1);
  tx.reset_partner();
  tx.begin_episode(10.0);
  const Vec z = w.state(w.eval_stream.row(0).transpose());
  const auto plan = tx.plan(z, 5.0);
  CHECK(plan.q.rows() == tx.candidates());
  CHECK(plan.q.cols() == tx.hypotheses());
  CHECK(std::abs(plan.policy.sum() - 1.0) < 1e-9);
  CHECK(q_features(plan.context, 0.5).rows() == tx.candidates() * tx.hypotheses());
  for (Index j = 0; j < tx.candidates(); ++j) {
    CHECK(tx.candidate(z, j).size() == w.k());
    CHECK(tx.candidate(z, j).cwiseAbs().maxCoeff() <= AgentConfig{}.quantizer.range);
  }
  CHECK(tx.candidate(z, tx.candidates() - 1).isApprox(z.cwiseMax(-4.0).cwiseMin(4.0)));
}

TEST_CASE("transmitter checkpoint round trip") {
  const World& w = shared_world();
  Rng rng(14);
  ReceiverAgent rx(w, AgentConfig{}, rng);
  TransmitterAgent a(w, AgentConfig{}, rng);
  a.register_library(rx.snapshot_library());
  a.q_net().layers().back().bias().set_value(Mat::Constant(1, 1, 0.25));
  const auto ck = nn::Checkpoint::from_json(a.checkpoint().to_json());
  Rng other(99);
  TransmitterAgent b(w, AgentConfig{}, other);
  b.restore(ck);
  CHECK(b.codebook() == a.codebook());
  const Vec z = w.state(w.eval_stream.row(1).transpose());
  a.reset_partner();
  b.reset_partner();
  a.begin_episode(8.0);
  b.begin_episode(8.0);
  CHECK(a.plan(z, 5.0).q == b.plan(z, 5.0).q);
}
