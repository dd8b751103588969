#include "tomsc/exp/selftest.hpp"

#include "tomsc/agents/belief.hpp"
#include "tomsc/nn/prob.hpp"
#include "tomsc/phy/channel.hpp"
#include "tomsc/semantic/metrics.hpp"
#include "tomsc/semantic/toy_pipeline.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <string>

namespace tomsc::exp {

namespace {

Vec random_simplex(Index n, Rng& rng) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = -std::log(1.0 - uniform01(rng)) + 1e-12;
  return v / v.sum();
}

bool kld_nonnegative(Rng& rng) {
  for (int t = 0; t < 500; ++t) {
    const Index n = 2 + static_cast<Index>(t % 6);
    if (nn::kld(random_simplex(n, rng), random_simplex(n, rng)) < 0.0) return false;
  }
  const Vec p = random_simplex(4, rng);
  return nn::kld(p, p) == 0.0;
}

bool softmax_properties(Rng& rng) {
  for (int t = 0; t < 200; ++t) {
    Vec x(5);
    for (Index i = 0; i < 5; ++i) x(i) = 10.0 * standard_normal(rng);
    const Vec a = nn::softmax(x);
    const Vec b = nn::softmax((x.array() + 37.5).matrix());
    if (std::abs(a.sum() - 1.0) > 1e-12 || (a - b).cwiseAbs().maxCoeff() > 1e-12) return false;
  }
  return true;
}

bool belief_properties(Rng& rng) {
  const agents::BeliefOptions plain{0.0};
  for (int t = 0; t < 200; ++t) {
    agents::Belief b{random_simplex(4, rng), 0};
    Vec l1(4), l2(4);
    for (Index i = 0; i < 4; ++i) {
      l1(i) = 0.05 + uniform01(rng);
      l2(i) = 0.05 + uniform01(rng);
    }
    const auto once = agents::update_belief(b, l1, plain);
    const auto scaled = agents::update_belief(b, 7.0 * l1, plain);
    const auto seq = agents::update_belief(once, l2, plain);
    const auto joint = agents::update_belief(b, l1.cwiseProduct(l2), plain);
    if (std::abs(once.weights.sum() - 1.0) > 1e-9) return false;
    if ((once.weights - scaled.weights).cwiseAbs().maxCoeff() > 1e-12) return false;
    if ((seq.weights - joint.weights).cwiseAbs().maxCoeff() > 1e-12) return false;
    const auto floored = agents::update_belief(b, l1);
    if (std::abs(floored.weights.sum() - 1.0) > 1e-9 || floored.weights.minCoeff() < 1e-3 - 1e-15) return false;
  }
  return true;
}

bool policy_shift_invariance(Rng& rng) {
  for (int t = 0; t < 200; ++t) {
    Mat q(6, 3);
    for (Index i = 0; i < q.size(); ++i) q.data()[i] = standard_normal(rng);
    const Vec b = random_simplex(3, rng);
    const Vec p = agents::transmitter_policy(q, b, 5.0);
    const Vec s = agents::transmitter_policy((q.array() + 4.2).matrix(), b, 5.0);
    Index i1 = 0, i2 = 0;
    p.maxCoeff(&i1);
    s.maxCoeff(&i2);
    if (i1 != i2 || std::abs(p.sum() - 1.0) > 1e-9) return false;
  }
  return true;
}

bool rayleigh_ber(Rng& rng) {
  const auto c = phy::Constellation::bpsk();
  const long bits = 200000;
  for (double snr : {0.0, 10.0}) {
    long errors = 0;
    phy::Bits tx(100);
    for (long done = 0; done < bits; done += 100) {
      for (auto& b : tx) b = static_cast<std::uint8_t>(uniform01(rng) < 0.5);
      phy::ChannelRealization r;
      const auto y = phy::transmit(phy::modulate(tx, c), snr, rng, r);
      const auto rx = phy::demodulate(y, r, c);
      for (std::size_t i = 0; i < tx.size(); ++i) errors += tx[i] != rx[i];
    }
    const double g = std::pow(10.0, snr / 10.0);
    const double p = 0.5 * (1.0 - std::sqrt(g / (1.0 + g)));
    // Fades are shared within 100-bit frames, so the error is inflated accordingly.
    const double se = std::sqrt(p * (1.0 - p) * 100.0 / bits);
    if (std::abs(static_cast<double>(errors) / bits - p) > 4.0 * se) return false;
  }
  return true;
}

bool identity_pipeline() {
  if (semantic::feedback(0.0).d != 1.0) return false;
  Mat ideal(3, 3);
  ideal << 0.8, 0.1, 0.1, 0.1, 0.8, 0.1, 0.1, 0.1, 0.8;
  const semantic::ToyPipeline toy(ideal, 300.0);
  for (int z = 0; z < 3; ++z) {
    if (semantic::feedback(toy.effectiveness_exact(z)).d < 1.0 - 1e-9) return false;
  }
  return true;
}

bool dense_gradient(Rng& rng) {
  for (int t = 0; t < 10; ++t) {
    nn::DenseLayer layer("g", 3, 2, nn::Activation::tanh, nn::Init::xavier, rng);
    Mat x(4, 3);
    for (Index i = 0; i < x.size(); ++i) x.data()[i] = standard_normal(rng);
    auto loss = [&] {
      nn::Tape tape;
      return nn::sum(nn::square(layer.forward(tape, tape.constant(x)))).scalar();
    };
    layer.weights().zero_grad();
    layer.bias().zero_grad();
    {
      nn::Tape tape;
      tape.backward(nn::sum(nn::square(layer.forward(tape, tape.constant(x)))));
    }
    const Mat g = layer.weights().grad();
    for (Index i = 0; i < g.size(); ++i) {
      Mat d = Mat::Zero(g.rows(), g.cols());
      d.data()[i] = 1e-5;
      layer.weights().apply_delta(d);
      const double up = loss();
      layer.weights().apply_delta(-2.0 * d);
      const double down = loss();
      layer.weights().apply_delta(d);
      const double fd = (up - down) / 2e-5;
      if (std::abs(fd - g.data()[i]) > 1e-4 * std::max(1.0, std::abs(fd))) return false;
    }
  }
  return true;
}

}  // namespace

bool run_selftest(std::ostream& log) {
  Rng rng(20240601);
  const std::pair<const char*, std::function<bool()>> checks[] = {
      {"kl divergence is nonnegative", [&] { return kld_nonnegative(rng); }},
      {"softmax normalized and shift invariant", [&] { return softmax_properties(rng); }},
      {"belief update normalization, scale invariance, composition", [&] { return belief_properties(rng); }},
      {"policy argmax invariant to constant Q shift", [&] { return policy_shift_invariance(rng); }},
      {"BPSK over Rayleigh matches closed-form BER", [&] { return rayleigh_ber(rng); }},
      {"noiseless identity pipeline gives d = 1", [&] { return identity_pipeline(); }},
      {"dense layer gradient matches finite differences", [&] { return dense_gradient(rng); }},
  };
  bool all = true;
  for (const auto& [name, check] : checks) {
    bool ok = false;
    std::string why;
    try {
      ok = check();
    } catch (const std::exception& e) {
      why = concat(" (", e.what(), ")");
    }
    log << (ok ? "ok   " : "FAIL ") << name << why << '\n';
    all = all && ok;
  }
  return all;
}

}  // namespace tomsc::exp
