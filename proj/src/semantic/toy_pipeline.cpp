#include "tomsc/semantic/toy_pipeline.hpp"

#include "tomsc/nn/prob.hpp"
#include "tomsc/phy/channel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>

namespace tomsc::semantic {

namespace {

phy::Bits word_bits(int w) { return {static_cast<std::uint8_t>((w >> 1) & 1), static_cast<std::uint8_t>(w & 1)}; }

}  // namespace

double block_fading_pattern_probability(int flips, double snr_db) {
  if (flips < 0 || flips > 2) fail("flips must be 0, 1 or 2");
  const double gamma = std::pow(10.0, snr_db / 10.0);
  auto integrand = [&](double g) {
    const double p = 0.5 * std::erfc(std::sqrt(g * gamma));
    return std::exp(-g) * std::pow(p, flips) * std::pow(1.0 - p, 2 - flips);
  };
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-14, &err);
}

ToyPipeline::ToyPipeline(Mat ideal_policy, double snr_db) : ideal_(std::move(ideal_policy)), snr_db_(snr_db) {
  if (ideal_.rows() != kStates) throw DimensionError(concat("toy pipeline needs ", kStates, " state rows"));
  for (Index z = 0; z < kStates; ++z) nn::require_distribution(ideal_.row(z).transpose(), "toy ideal policy");
}

Mat ToyPipeline::receiver_policy() const {
  Mat p(kWords, ideal_.cols());
  p.topRows(kStates) = ideal_;
  p.row(kWords - 1).setConstant(1.0 / static_cast<double>(ideal_.cols()));
  return p;
}

Mat ToyPipeline::word_kernel() const {
  Mat k(kStates, kWords);
  double pattern[3];
  for (int f = 0; f < 3; ++f) pattern[f] = block_fading_pattern_probability(f, snr_db_);
  for (int z = 0; z < kStates; ++z)
    for (int w = 0; w < kWords; ++w) k(z, w) = pattern[__builtin_popcount(static_cast<unsigned>(z ^ w))];
  return k;
}

Vec ToyPipeline::induced_exact(int z) const {
  const Mat k = word_kernel();
  return receiver_policy().transpose() * k.row(z).transpose();
}

double ToyPipeline::effectiveness_exact(int z) const { return nn::kld(ideal_.row(z).transpose(), induced_exact(z)); }

Mat ToyPipeline::word_kernel_monte_carlo(long samples, Rng& rng) const {
  const auto c = phy::Constellation::bpsk();
  Mat k = Mat::Zero(kStates, kWords);
  for (int z = 0; z < kStates; ++z) {
    const auto frame = phy::modulate(word_bits(z), c);
    for (long s = 0; s < samples; ++s) {
      phy::ChannelRealization r;
      const auto y = phy::transmit(frame, snr_db_, rng, r);
      const auto b = phy::demodulate(y, r, c);
      k(z, (b[0] << 1) | b[1]) += 1.0;
    }
  }
  return k / static_cast<double>(samples);
}

ToyPipeline::Estimate ToyPipeline::effectiveness_monte_carlo(int z, long samples, Rng& rng) const {
  if (samples < 2) fail("monte carlo needs at least 2 samples");
  const auto c = phy::Constellation::bpsk();
  const Mat policy = receiver_policy();
  const auto frame = phy::modulate(word_bits(z), c);
  Vec counts = Vec::Zero(kWords);
  for (long s = 0; s < samples; ++s) {
    phy::ChannelRealization r;
    const auto y = phy::transmit(frame, snr_db_, rng, r);
    const auto b = phy::demodulate(y, r, c);
    counts[(b[0] << 1) | b[1]] += 1.0;
  }
  const Vec freq = counts / static_cast<double>(samples);
  const Vec induced = policy.transpose() * freq;
  const Vec ideal = ideal_.row(z).transpose();
  Estimate e;
  e.value = nn::kld(ideal, induced);
  // delta method: C = const - sum_a ideal_a log q_a with q the mean of X_i = policy row of word i
  const Vec score = policy * ideal.cwiseQuotient(induced);  // per word
  const double mean = freq.dot(score);
  const double second = freq.dot(score.cwiseProduct(score));
  e.standard_error = std::sqrt(std::max(0.0, second - mean * mean) / static_cast<double>(samples));
  return e;
}

}  // namespace tomsc::semantic
