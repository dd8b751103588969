#include "tomsc/agents/quantizer.hpp"

#include <algorithm>
#include <cmath>

namespace tomsc::agents {

namespace {

void check_bits(int bits) {
  if (bits < 1 || bits > 16) fail("quantizer: bits per dimension must be in [1, 16], got ", bits);
}

void check_range(double range) {
  if (!(range > 0.0) || !std::isfinite(range)) fail("quantizer: range must be positive, got ", range);
}

}  // namespace

int QuantizerConfig::select_bits(double cqi_db) const {
  if (cqi_db >= high_db) return high_bits;
  if (cqi_db >= mid_db) return mid_bits;
  return low_bits;
}

void QuantizerConfig::validate() const {
  check_range(range);
  check_bits(high_bits);
  check_bits(mid_bits);
  check_bits(low_bits);
  if (mid_db > high_db) fail("quantizer: mid threshold ", mid_db, " dB above high threshold ", high_db, " dB");
}

double quantizer_step(int bits, double range) {
  check_bits(bits);
  check_range(range);
  return 2.0 * range / std::ldexp(1.0, bits);
}

QuantizedSymbol quantize(const Vec& s, int bits, double range) {
  const double step = quantizer_step(bits, range);
  const long top = (1L << bits) - 1;
  QuantizedSymbol q;
  q.bits_per_dim = bits;
  q.dims = s.size();
  q.range = range;
  q.bits.reserve(static_cast<std::size_t>(s.size() * bits));
  for (Index i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i])) fail("quantizer: component ", i, " is not finite");
    const double x = std::clamp(s[i], -range, range);
    const long code = std::clamp(static_cast<long>(std::floor((x + range) / step)), 0L, top);
    for (int b = bits - 1; b >= 0; --b) q.bits.push_back(static_cast<std::uint8_t>((code >> b) & 1L));
  }
  return q;
}

Vec dequantize(const phy::Bits& bits, int bits_per_dim, Index dims, double range) {
  const double step = quantizer_step(bits_per_dim, range);
  if (static_cast<Index>(bits.size()) != dims * bits_per_dim) {
    throw DimensionError(concat("dequantize: ", bits.size(), " bits for ", dims, " components of ", bits_per_dim,
                                " bits"));
  }
  Vec out(dims);
  std::size_t pos = 0;
  for (Index i = 0; i < dims; ++i) {
    long code = 0;
    for (int b = 0; b < bits_per_dim; ++b) code = (code << 1) | (bits[pos++] & 1U);
    out[i] = -range + (static_cast<double>(code) + 0.5) * step;
  }
  return out;
}

Vec requantize(const Vec& s, int bits, double range) {
  const double step = quantizer_step(bits, range);
  const long top = (1L << bits) - 1;
  Vec out(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    const double x = std::clamp(s[i], -range, range);
    const long code = std::clamp(static_cast<long>(std::floor((x + range) / step)), 0L, top);
    out[i] = -range + (static_cast<double>(code) + 0.5) * step;
  }
  return out;
}

QuantizedSymbol quantize_to_bits(const Vec& s, double cqi_db, const QuantizerConfig& config) {
  config.validate();
  QuantizedSymbol q = quantize(s, config.select_bits(cqi_db), config.range);
  q.cqi_db = cqi_db;
  return q;
}

}  // namespace tomsc::agents
