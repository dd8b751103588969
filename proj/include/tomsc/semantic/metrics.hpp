#pragma once

#include "tomsc/nn/prob.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace tomsc::semantic {

/// Action distribution factorized over action-vector components; a joint
/// distribution is the single-component case.
using ActionDistribution = std::vector<Vec>;

void require_action_distribution(const ActionDistribution& p, const char* what);

/// S(z) = KL(pi(a|z) || pi(a)), summed over components.
double semantic_information(const ActionDistribution& policy_given_z, const ActionDistribution& marginal);

/// C_t = KL(ideal || induced), summed over components.
double semantic_effectiveness(const ActionDistribution& ideal, const ActionDistribution& induced,
                              const nn::KldOptions& options = {});

struct SemanticFeedback {
  double d = 1.0;
  long episode = 0;
};

/// d = 1 / (1 + C).
SemanticFeedback feedback(double c_t, long episode = 0);
/// d rounded to `bits` bits on (0, 1]; never rounds to zero.
double quantize_feedback(double d, int bits = 8);

/// ||z - zhat||^2 for equal-length vectors.
double semantic_distortion(const Vec& z, const Vec& zhat);
/// Places `values` at `indices` in a zero vector of length n.
Vec embed(const std::vector<Index>& indices, const Vec& values, Index n);

struct ReliabilityConfig {
  double delta = 0.5;
  double epsilon = 0.1;
  void validate() const;
};

struct Reliability {
  double probability = 0.0;
  bool pass = false;
};

Reliability semantic_reliability(const std::vector<double>& distortions, const ReliabilityConfig& config);

/// Average received semantic information over finite alphabets.
///   prior(z): p(z); kernel(z, zh): p(zh | z); policy(z, a): pi(a|z);
///   similarity(zh, z): 1 inside the delta ball, else 0.
/// Result: sum_z p(z) sum_zh p(zh|z) Z(zh,z) sum_a pi(a|z) log(pibar(a|zh) / pi(a)),
/// where pibar(a|zh) = sum_z' p(z'|zh) pi(a|z').
double received_semantic_information(const Vec& prior, const Mat& kernel, const Mat& policy, const Mat& similarity);

struct MetricRecord {
  long episode = 0;
  double snr_db = 0.0;
  double c_t = 0.0;
  double d_t = 1.0;
  double e_t = 0.0;
  double s_z = 0.0;
  long bits_sent = 0;
  /// Causal-state bits credited on success (k x bits per dimension).
  long payload_bits = 0;
  long channel_uses = 0;
  bool success = false;
};

/// Fixed column order of MetricRecord CSV files.
const char* metric_csv_header();
void write_metric_row(std::ostream& out, const MetricRecord& r);
void write_metric_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path);

/// Successful payload bits per channel use (retransmissions included in uses).
double spectral_efficiency(const std::vector<MetricRecord>& records);

struct EfficiencyTally {
  double payload_bits = 0.0;
  double channel_uses = 0.0;
  void add(const MetricRecord& r);
  double value() const;
};

}  // namespace tomsc::semantic
