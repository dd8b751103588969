#pragma once

#include "tomsc/train/episode.hpp"

#include <string>
#include <vector>

namespace tomsc::baselines {

enum class Scheme { tom, no_tom, classical, repetition, harq };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme s);

struct BaselineConfig {
  int k_repeats = 3;
  int max_retx = 3;
  void validate() const;
};

/// Frozen-agent evaluation protocol shared by every scheme.
struct EvalConfig {
  int episodes = 500;
  int horizon = 16;
  double snr_db = 10.0;
  /// A new receiver is drawn every this many episodes.
  int partner_period = 25;
  /// When positive, the active task alternates every this many episodes and
  /// receivers are drawn from the active task; otherwise from all receivers.
  int task_period = 0;
  double c_len = 0.01;
  double beta = 5.0;
  semantic::ReliabilityConfig reliability;
  BaselineConfig baseline;
  /// Seeds the scenario stream (partners, stream offsets); shared by all schemes.
  std::uint64_t scenario_seed = 0;

  void validate() const;
};

/// Receiver id active in each episode.
std::vector<int> partner_schedule(const agents::World& world, const EvalConfig& config);

/// Runs one scheme. `tx` is the SC transmitter for tom/no_tom/repetition/harq
/// (ignored for classical); both agents are copied, so the caller's agents
/// are not modified. Records are per transmission.
std::vector<semantic::MetricRecord> run_scheme(Scheme scheme, const agents::TransmitterAgent& tx,
                                               const agents::ReceiverAgent& rx, const EvalConfig& config, Rng& rng);

std::vector<semantic::MetricRecord> run_sc_no_tom(const agents::TransmitterAgent& tx, const agents::ReceiverAgent& rx,
                                                  const EvalConfig& config, Rng& rng);
std::vector<semantic::MetricRecord> run_classical(const agents::ReceiverAgent& rx,
                                                  const agents::QuantizerConfig& quantizer, const EvalConfig& config,
                                                  Rng& rng);

}  // namespace tomsc::baselines
