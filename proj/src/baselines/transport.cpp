#include "tomsc/baselines/transport.hpp"

namespace tomsc::baselines {

RepetitionResult run_repetition(const phy::Bits& payload, int k, phy::Link& link, Rng& rng) {
  if (k < 1) fail("repetition: k must be at least 1, got ", k);
  if (k % 2 == 0) fail("repetition: k must be odd for a majority vote, got ", k);
  std::vector<int> ones(payload.size(), 0);
  RepetitionResult out;
  for (int r = 0; r < k; ++r) {
    const auto res = link.send(payload, rng);
    for (std::size_t i = 0; i < payload.size(); ++i) ones[i] += res.bits[i];
    out.channel_uses += res.channel_uses;
    out.cqi = res.cqi;
  }
  out.bits.resize(payload.size());
  for (std::size_t i = 0; i < payload.size(); ++i) out.bits[i] = static_cast<std::uint8_t>(2 * ones[i] > k);
  return out;
}

HarqResult run_harq(const phy::Bits& payload, int max_retx, phy::Link& link, Rng& rng) {
  if (max_retx < 0) fail("harq: max_retx must be nonnegative, got ", max_retx);
  HarqResult out;
  std::vector<double> combined(payload.size(), 0.0);
  out.bits.assign(payload.size(), 0);
  for (int attempt = 0; attempt <= max_retx; ++attempt) {
    const auto res = link.send(payload, rng);
    if (res.llr.size() != payload.size()) {
      fail("harq: link returned ", res.llr.size(), " LLRs for ", payload.size(), " bits");
    }
    out.channel_uses += res.channel_uses;
    out.cqi = res.cqi;
    out.retransmissions = attempt;
    for (std::size_t i = 0; i < payload.size(); ++i) {
      combined[i] += res.llr[i];
      out.bits[i] = static_cast<std::uint8_t>(combined[i] < 0.0);
    }
    const std::size_t errors = phy::count_bit_errors(out.bits, payload);
    out.errors_per_attempt.push_back(errors);
    if (errors == 0) {
      out.delivered = true;
      break;
    }
  }
  return out;
}

Transport plain_transport(phy::Link& link) {
  return [&link](const phy::Bits& bits, Rng& rng) { return link.send(bits, rng); };
}

Transport repetition_transport(phy::Link& link, int k) {
  if (k < 1 || k % 2 == 0) fail("repetition: k must be odd and positive, got ", k);
  return [&link, k](const phy::Bits& bits, Rng& rng) {
    auto r = run_repetition(bits, k, link, rng);
    phy::LinkResult out;
    out.bits = std::move(r.bits);
    out.channel_uses = r.channel_uses;
    out.cqi = r.cqi;
    return out;
  };
}

Transport harq_transport(phy::Link& link, int max_retx) {
  if (max_retx < 0) fail("harq: max_retx must be nonnegative, got ", max_retx);
  return [&link, max_retx](const phy::Bits& bits, Rng& rng) {
    auto r = run_harq(bits, max_retx, link, rng);
    phy::LinkResult out;
    out.bits = std::move(r.bits);
    out.channel_uses = r.channel_uses;
    out.cqi = r.cqi;
    return out;
  };
}

}  // namespace tomsc::baselines
