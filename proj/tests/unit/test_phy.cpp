#include <doctest.h>

#include "tomsc/phy/link.hpp"

#include <cmath>

using namespace tomsc;
using namespace tomsc::phy;

TEST_CASE("constellations have unit energy") {
  CHECK(Constellation::bpsk().average_energy() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(Constellation::qpsk().average_energy() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(Constellation::qpsk().order() == 4);
  CHECK_THROWS_AS(Constellation::from_name("qam1024"), Error);
}

TEST_CASE("modulate examples") {
  auto f = modulate({0, 1, 0}, Constellation::bpsk());
  REQUIRE(f.length() == 3);
  CHECK(f.symbols[0] == Complex(1, 0));
  CHECK(f.symbols[1] == Complex(-1, 0));
  CHECK(f.symbols[2] == Complex(1, 0));
  CHECK(modulate({}, Constellation::bpsk()).length() == 0);
  CHECK_THROWS_AS(modulate({0, 1, 0}, Constellation::qpsk()), Error);
}

TEST_CASE("noiseless unit fade is the identity and roundtrips") {
  Rng rng(1);
  TransmitOptions opt;
  opt.noiseless = true;
  opt.fade = Complex(1, 0);
  for (const auto& c : {Constellation::bpsk(), Constellation::qpsk()}) {
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 2 * (rng() % 40);
      Bits bits(n);
      for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
      auto frame = modulate(bits, c);
      ChannelRealization r;
      auto y = transmit(frame, 0.0, rng, r, opt);
      for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == frame.symbols[i]);
      CHECK(demodulate(y, r, c) == bits);
    }
  }
}

TEST_CASE("noise variance and fade power") {
  Rng rng(2);
  const int n = 1000000;
  ChannelRealization r;
  TransmitOptions opt;
  opt.fade = Complex(0, 0);
  ChannelFrame frame;
  frame.symbols.assign(n, Complex(1, 0));
  auto y = transmit(frame, 0.0, rng, r, opt);
  double v = 0.0;
  for (const auto& yi : y) v += std::norm(yi);
  CHECK(v / n == doctest::Approx(1.0).epsilon(0.01));

  double g = 0.0;
  for (int i = 0; i < n; ++i) g += std::norm(draw_fade(rng));
  CHECK(g / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("transmit is reproducible") {
  auto frame = modulate({0, 1, 1, 0, 1}, Constellation::bpsk());
  Rng a(77), b(77);
  ChannelRealization ra, rb;
  auto ya = transmit(frame, 3.0, a, ra);
  auto yb = transmit(frame, 3.0, b, rb);
  REQUIRE(ya.size() == yb.size());
  for (std::size_t i = 0; i < ya.size(); ++i) {
    CHECK(ya[i].real() == yb[i].real());
    CHECK(ya[i].imag() == yb[i].imag());
  }
}

TEST_CASE("rayleigh BER matches closed form") {
  CHECK(rayleigh_bpsk_ber(10.0) == doctest::Approx(0.0233).epsilon(0.01));
  CHECK(rayleigh_bpsk_ber(0.0) == doctest::Approx(0.1464).epsilon(0.01));
  for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0}) {
    Rng rng(static_cast<std::uint64_t>(1000 + snr));
    FadingLink link(snr);
    const int n = 1000000;
    std::size_t errors = 0;
    for (int i = 0; i < n; ++i) {
      const std::uint8_t b = static_cast<std::uint8_t>(rng() & 1U);
      auto res = link.send({b}, rng);
      errors += res.bits[0] != b;
    }
    const double p = rayleigh_bpsk_ber(snr);
    const double se = std::sqrt(p * (1 - p) / n);
    const double ber = static_cast<double>(errors) / n;
    CHECK_MESSAGE(std::abs(ber - p) <= 3 * se, "snr ", snr, " ber ", ber, " oracle ", p);
    CHECK(link.channel_uses() == static_cast<std::size_t>(n));
  }
}

TEST_CASE("cqi examples") {
  ChannelRealization r;
  r.fade = Complex(1, 0);
  r.noise_variance = noise_variance(10.0);
  CHECK(measure_cqi(r) == doctest::Approx(10.0));
  r.fade = Complex(std::sqrt(0.5), 0);
  CHECK(measure_cqi(r) == doctest::Approx(6.9897).epsilon(1e-4));
  Rng a(3), b(3);
  CqiOptions none;
  CHECK(measure_cqi(r, &a, none) == measure_cqi(r, &b, none));
  CqiOptions noisy;
  noisy.estimation_noise_db = 1.0;
  Rng c(4), d(4);
  CHECK(measure_cqi(r, &c, noisy) == measure_cqi(r, &d, noisy));
  CHECK(std::isfinite(measure_cqi(ChannelRealization{})));
}

TEST_CASE("llr sign agrees with hard decision") {
  Rng rng(5);
  FadingLink link(5.0);
  for (int i = 0; i < 1000; ++i) {
    Bits bits{static_cast<std::uint8_t>(rng() & 1U), static_cast<std::uint8_t>(rng() & 1U)};
    auto res = link.send(bits, rng);
    for (std::size_t k = 0; k < bits.size(); ++k) CHECK((res.llr[k] < 0) == (res.bits[k] == 1));
  }
}

TEST_CASE("binary symmetric link flip rate") {
  Rng rng(6);
  BinarySymmetricLink link(0.2, 5.0);
  Bits zeros(100000, 0);
  auto res = link.send(zeros, rng);
  const double rate = static_cast<double>(count_bit_errors(zeros, res.bits)) / zeros.size();
  CHECK(rate == doctest::Approx(0.2).epsilon(0.03));
  CHECK_THROWS_AS(BinarySymmetricLink(1.5, 0.0), Error);
}
