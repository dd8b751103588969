#pragma once

#include "tomsc/common.hpp"

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace tomsc::phy {

using Complex = std::complex<double>;
using Bits = std::vector<std::uint8_t>;

/// Unit-average-energy constellation with Gray labelling.
class Constellation {
 public:
  static Constellation bpsk();
  static Constellation qpsk();
  static Constellation from_name(const std::string& name);

  int order() const { return static_cast<int>(points_.size()); }
  int bits_per_symbol() const { return bits_per_symbol_; }
  const std::vector<Complex>& points() const { return points_; }
  const std::string& name() const { return name_; }
  double average_energy() const;

 private:
  Constellation(std::string name, std::vector<Complex> points, int bps);
  std::string name_;
  std::vector<Complex> points_;  // indexed by the bit label read MSB first
  int bits_per_symbol_ = 1;
};

struct ChannelFrame {
  std::vector<Complex> symbols;
  std::size_t length() const { return symbols.size(); }
};

struct ChannelRealization {
  Complex fade{1.0, 0.0};
  double noise_variance = 0.0;
  double snr_db = std::numeric_limits<double>::infinity();
};

struct TransmitOptions {
  bool noiseless = false;          ///< disable additive noise (infinite SNR)
  std::optional<Complex> fade;     ///< force h instead of drawing CN(0,1)
};

ChannelFrame modulate(const Bits& bits, const Constellation& c);

/// Noise variance for unit symbol energy at the given SNR.
double noise_variance(double snr_db);

/// y_i = h u_i + n_i, one h per frame.
std::vector<Complex> transmit(const ChannelFrame& frame, double snr_db, Rng& rng, ChannelRealization& realization,
                              const TransmitOptions& options = {});

/// Coherent ML detection after equalizing by h.
Bits demodulate(const std::vector<Complex>& y, const ChannelRealization& realization, const Constellation& c);

/// BPSK log-likelihood ratios log p(y|0)/p(y|1) with perfect CSI.
std::vector<double> bpsk_llr(const std::vector<Complex>& y, const ChannelRealization& realization);

struct CqiOptions {
  double estimation_noise_db = 0.0;  ///< std-dev of additive Gaussian error on p
};

/// Post-fading SNR in dB. Capped to a large finite value when noise is off
/// or the fade vanishes so the result is always finite.
double measure_cqi(const ChannelRealization& r, Rng* rng = nullptr, const CqiOptions& options = {});

/// Average BER of coherent BPSK over Rayleigh fading at mean SNR (dB).
double rayleigh_bpsk_ber(double snr_db);

/// Draws h ~ CN(0,1).
Complex draw_fade(Rng& rng);

}  // namespace tomsc::phy
