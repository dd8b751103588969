#pragma once

#include "tomsc/phy/channel.hpp"

#include <memory>

namespace tomsc::phy {

/// Outcome of pushing one frame of bits through a link.
struct LinkResult {
  Bits bits;                 ///< hard decisions
  std::vector<double> llr;   ///< log p(bit=0)/p(bit=1) per bit
  double cqi = 0.0;          ///< measured p for this frame
  std::size_t channel_uses = 0;
};

/// Bit-level link: modulation, one channel frame, detection and CQI.
class Link {
 public:
  virtual ~Link() = default;
  virtual LinkResult send(const Bits& bits, Rng& rng) = 0;
  /// Mean SNR the link is configured for (dB).
  virtual double snr_db() const = 0;
  std::size_t channel_uses() const { return uses_; }
  void reset_uses() { uses_ = 0; }

 protected:
  std::size_t uses_ = 0;
};

/// Block Rayleigh fading with coherent BPSK/QPSK detection.
class FadingLink : public Link {
 public:
  FadingLink(double snr_db, Constellation constellation = Constellation::bpsk(), CqiOptions cqi = {});
  LinkResult send(const Bits& bits, Rng& rng) override;
  double snr_db() const override { return snr_db_; }
  void set_snr_db(double snr) { snr_db_ = snr; }

 private:
  double snr_db_;
  Constellation constellation_;
  CqiOptions cqi_;
};

/// Error-free link; CQI reports a fixed value.
class NoiselessLink : public Link {
 public:
  explicit NoiselessLink(double cqi_db = 30.0) : cqi_(cqi_db) {}
  LinkResult send(const Bits& bits, Rng& rng) override;
  double snr_db() const override { return cqi_; }

 private:
  double cqi_;
};

/// Independent bit flips with probability `flip`.
class BinarySymmetricLink : public Link {
 public:
  BinarySymmetricLink(double flip, double cqi_db);
  LinkResult send(const Bits& bits, Rng& rng) override;
  double snr_db() const override { return cqi_; }

 private:
  double flip_;
  double cqi_;
};

std::unique_ptr<Link> make_fading_link(double snr_db);

std::size_t count_bit_errors(const Bits& a, const Bits& b);

}  // namespace tomsc::phy
