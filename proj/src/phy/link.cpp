#include "tomsc/phy/link.hpp"

#include <cmath>

namespace tomsc::phy {

FadingLink::FadingLink(double snr_db, Constellation constellation, CqiOptions cqi)
    : snr_db_(snr_db), constellation_(std::move(constellation)), cqi_(cqi) {}

LinkResult FadingLink::send(const Bits& bits, Rng& rng) {
  ChannelFrame frame = modulate(bits, constellation_);
  ChannelRealization real;
  auto y = transmit(frame, snr_db_, rng, real);
  LinkResult out;
  out.bits = demodulate(y, real, constellation_);
  if (constellation_.bits_per_symbol() == 1) {
    out.llr = bpsk_llr(y, real);
  } else {
    out.llr.reserve(out.bits.size());
    for (auto b : out.bits) out.llr.push_back(b ? -1.0 : 1.0);
  }
  out.cqi = measure_cqi(real, &rng, cqi_);
  out.channel_uses = frame.length();
  uses_ += out.channel_uses;
  return out;
}

LinkResult NoiselessLink::send(const Bits& bits, Rng&) {
  LinkResult out;
  out.bits = bits;
  for (auto b : bits) out.llr.push_back(b ? -1e6 : 1e6);
  out.cqi = cqi_;
  out.channel_uses = bits.size();
  uses_ += out.channel_uses;
  return out;
}

BinarySymmetricLink::BinarySymmetricLink(double flip, double cqi_db) : flip_(flip), cqi_(cqi_db) {
  if (flip < 0.0 || flip > 1.0) fail("flip probability must lie in [0,1], got ", flip);
}

LinkResult BinarySymmetricLink::send(const Bits& bits, Rng& rng) {
  LinkResult out;
  const double mag = (flip_ <= 0.0 || flip_ >= 1.0) ? 1e6 : std::log((1.0 - flip_) / flip_);
  for (auto b : bits) {
    const std::uint8_t r = uniform01(rng) < flip_ ? static_cast<std::uint8_t>(1 - b) : b;
    out.bits.push_back(r);
    out.llr.push_back(r ? -mag : mag);
  }
  out.cqi = cqi_;
  out.channel_uses = bits.size();
  uses_ += out.channel_uses;
  return out;
}

std::unique_ptr<Link> make_fading_link(double snr_db) { return std::make_unique<FadingLink>(snr_db); }

std::size_t count_bit_errors(const Bits& a, const Bits& b) {
  if (a.size() != b.size()) throw DimensionError(concat("bit sequences differ in length: ", a.size(), " vs ", b.size()));
  std::size_t e = 0;
  for (std::size_t i = 0; i < a.size(); ++i) e += a[i] != b[i];
  return e;
}

}  // namespace tomsc::phy
