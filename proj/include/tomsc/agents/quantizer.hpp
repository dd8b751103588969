#pragma once

#include "tomsc/phy/channel.hpp"

namespace tomsc::agents {

/// Rate table: CQI at or above `high_db` uses `high_bits`, at or above
/// `mid_db` uses `mid_bits`, otherwise `low_bits`.
struct QuantizerConfig {
  double range = 4.0;
  double high_db = 15.0;
  double mid_db = 5.0;
  int high_bits = 4;
  int mid_bits = 6;
  int low_bits = 8;

  int select_bits(double cqi_db) const;
  void validate() const;
};

struct QuantizedSymbol {
  phy::Bits bits;  ///< MSB first, one B-bit code per component
  int bits_per_dim = 0;
  Index dims = 0;
  double range = 0.0;
  double cqi_db = 0.0;  ///< CQI the rate was selected from
};

double quantizer_step(int bits, double range);
/// Uniform mid-rise quantizer over [-range, range]; inputs outside are clipped.
QuantizedSymbol quantize(const Vec& s, int bits, double range);
Vec dequantize(const phy::Bits& bits, int bits_per_dim, Index dims, double range);
/// Quantize then dequantize without a channel.
Vec requantize(const Vec& s, int bits, double range);

/// Picks B from the CQI table and quantizes.
QuantizedSymbol quantize_to_bits(const Vec& s, double cqi_db, const QuantizerConfig& config);

}  // namespace tomsc::agents
