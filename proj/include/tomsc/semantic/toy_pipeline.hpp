#pragma once

#include "tomsc/common.hpp"

namespace tomsc::semantic {

/// Three-state toy link: state z in {0,1,2} is sent as a 2-bit label
/// (00, 01, 10) over two BPSK symbols sharing one Rayleigh fade. The receiver
/// makes hard bit decisions; the unused word 11 maps to a uniform action
/// distribution, valid words to the ideal policy of the decoded state.
class ToyPipeline {
 public:
  ToyPipeline(Mat ideal_policy, double snr_db);

  static constexpr int kStates = 3;
  static constexpr int kWords = 4;

  const Mat& ideal() const { return ideal_; }
  double snr_db() const { return snr_db_; }

  /// Receiver action distribution after decoding word w (rows: words).
  Mat receiver_policy() const;

  /// Exact p(word | z) by enumerating bit-error patterns and integrating
  /// the fade power analytically over its exponential law.
  Mat word_kernel() const;

  /// Exact induced action distribution for state z.
  Vec induced_exact(int z) const;
  double effectiveness_exact(int z) const;

  struct Estimate {
    double value = 0.0;
    double standard_error = 0.0;
  };
  /// Monte Carlo over full modulate/transmit/demodulate runs.
  Estimate effectiveness_monte_carlo(int z, long samples, Rng& rng) const;
  /// Monte Carlo estimate of the word kernel.
  Mat word_kernel_monte_carlo(long samples, Rng& rng) const;

 private:
  Mat ideal_;
  double snr_db_;
};

/// E over g ~ Exp(1) of p(g)^flips (1 - p(g))^(2 - flips), p(g) the BPSK bit
/// error probability at instantaneous SNR g * 10^(snr/10).
double block_fading_pattern_probability(int flips, double snr_db);

}  // namespace tomsc::semantic
