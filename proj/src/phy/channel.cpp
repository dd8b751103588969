#include "tomsc/phy/channel.hpp"

#include <cmath>

namespace tomsc::phy {

namespace {
constexpr double kCqiCap = 200.0;
}

Constellation::Constellation(std::string name, std::vector<Complex> points, int bps)
    : name_(std::move(name)), points_(std::move(points)), bits_per_symbol_(bps) {}

Constellation Constellation::bpsk() { return Constellation("bpsk", {Complex(1, 0), Complex(-1, 0)}, 1); }

Constellation Constellation::qpsk() {
  const double a = 1.0 / std::sqrt(2.0);
  // label b0 b1 -> (1-2 b0, 1-2 b1) / sqrt 2
  return Constellation("qpsk", {Complex(a, a), Complex(a, -a), Complex(-a, a), Complex(-a, -a)}, 2);
}

Constellation Constellation::from_name(const std::string& name) {
  if (name == "bpsk") return bpsk();
  if (name == "qpsk") return qpsk();
  fail("unknown constellation '", name, "'");
}

double Constellation::average_energy() const {
  double e = 0.0;
  for (const auto& p : points_) e += std::norm(p);
  return e / static_cast<double>(points_.size());
}

ChannelFrame modulate(const Bits& bits, const Constellation& c) {
  const auto bps = static_cast<std::size_t>(c.bits_per_symbol());
  if (bits.size() % bps != 0) {
    fail("modulate: ", bits.size(), " bits is not a multiple of ", bps, " bits per ", c.name(), " symbol");
  }
  ChannelFrame f;
  f.symbols.reserve(bits.size() / bps);
  for (std::size_t i = 0; i < bits.size(); i += bps) {
    std::size_t label = 0;
    for (std::size_t k = 0; k < bps; ++k) {
      if (bits[i + k] > 1) fail("modulate: bit ", i + k, " has value ", int(bits[i + k]));
      label = (label << 1) | bits[i + k];
    }
    f.symbols.push_back(c.points()[label]);
  }
  return f;
}

double noise_variance(double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0) return 0.0;
  if (!std::isfinite(snr_db)) fail("invalid snr ", snr_db);
  return std::pow(10.0, -snr_db / 10.0);
}

Complex draw_fade(Rng& rng) {
  const double s = std::sqrt(0.5);
  const double re = standard_normal(rng) * s;
  const double im = standard_normal(rng) * s;
  return {re, im};
}

std::vector<Complex> transmit(const ChannelFrame& frame, double snr_db, Rng& rng, ChannelRealization& realization,
                              const TransmitOptions& options) {
  realization.snr_db = options.noiseless ? std::numeric_limits<double>::infinity() : snr_db;
  realization.noise_variance = options.noiseless ? 0.0 : noise_variance(snr_db);
  realization.fade = options.fade ? *options.fade : draw_fade(rng);
  const double s = std::sqrt(realization.noise_variance / 2.0);
  std::vector<Complex> y;
  y.reserve(frame.length());
  for (const auto& u : frame.symbols) {
    Complex n(0.0, 0.0);
    if (realization.noise_variance > 0.0) {
      const double re = standard_normal(rng) * s;
      const double im = standard_normal(rng) * s;
      n = {re, im};
    }
    y.push_back(realization.fade * u + n);
  }
  return y;
}

Bits demodulate(const std::vector<Complex>& y, const ChannelRealization& realization, const Constellation& c) {
  Bits out;
  out.reserve(y.size() * static_cast<std::size_t>(c.bits_per_symbol()));
  const Complex h = realization.fade;
  for (const auto& yi : y) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < c.points().size(); ++m) {
      const double d = std::norm(yi - h * c.points()[m]);
      if (d < best_d) {
        best_d = d;
        best = m;
      }
    }
    for (int k = c.bits_per_symbol() - 1; k >= 0; --k) out.push_back(static_cast<std::uint8_t>((best >> k) & 1U));
  }
  return out;
}

std::vector<double> bpsk_llr(const std::vector<Complex>& y, const ChannelRealization& realization) {
  std::vector<double> llr;
  llr.reserve(y.size());
  const double nv = std::max(realization.noise_variance, 1e-300);
  for (const auto& yi : y) {
    double v = 4.0 * (std::conj(realization.fade) * yi).real() / nv;
    if (!std::isfinite(v)) v = v > 0 ? 1e300 : -1e300;
    llr.push_back(v);
  }
  return llr;
}

double measure_cqi(const ChannelRealization& r, Rng* rng, const CqiOptions& options) {
  const double g = std::norm(r.fade);
  double p;
  if (r.noise_variance <= 0.0) {
    p = g > 0.0 ? kCqiCap : -kCqiCap;
  } else if (g <= 0.0) {
    p = -kCqiCap;
  } else {
    p = 10.0 * std::log10(g / r.noise_variance);
  }
  if (options.estimation_noise_db > 0.0) {
    if (rng == nullptr) fail("measure_cqi: estimation noise requested without an rng");
    p += options.estimation_noise_db * standard_normal(*rng);
  }
  return std::clamp(p, -kCqiCap, kCqiCap);
}

double rayleigh_bpsk_ber(double snr_db) {
  const double g = std::pow(10.0, snr_db / 10.0);
  return 0.5 * (1.0 - std::sqrt(g / (1.0 + g)));
}

}  // namespace tomsc::phy
