#pragma once

#include "tomsc/phy/link.hpp"

#include <functional>

namespace tomsc::baselines {

/// Bits-in, bits-out wrapper around a link; channel_uses counts every
/// transmission it made.
using Transport = std::function<phy::LinkResult(const phy::Bits&, Rng&)>;

struct RepetitionResult {
  phy::Bits bits;
  std::size_t channel_uses = 0;
  double cqi = 0.0;
};

/// Sends the whole frame k times (k odd) and takes a per-bit majority vote.
RepetitionResult run_repetition(const phy::Bits& payload, int k, phy::Link& link, Rng& rng);

struct HarqResult {
  phy::Bits bits;
  std::size_t channel_uses = 0;
  int retransmissions = 0;
  bool delivered = false;
  double cqi = 0.0;
  /// Bit errors after each attempt's combining, one entry per attempt.
  std::vector<std::size_t> errors_per_attempt;
};

/// Type-I HARQ with chase combining: LLRs of all attempts are summed and the
/// frame is resent while the combined decision differs from the payload
/// (ideal error detection), at most max_retx times.
HarqResult run_harq(const phy::Bits& payload, int max_retx, phy::Link& link, Rng& rng);

Transport plain_transport(phy::Link& link);
Transport repetition_transport(phy::Link& link, int k);
Transport harq_transport(phy::Link& link, int max_retx);

}  // namespace tomsc::baselines
