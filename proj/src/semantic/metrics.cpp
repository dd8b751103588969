#include "tomsc/semantic/metrics.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

namespace tomsc::semantic {

void require_action_distribution(const ActionDistribution& p, const char* what) {
  if (p.empty()) fail(what, ": no components");
  for (const auto& c : p) nn::require_distribution(c, what);
}

namespace {

double factorized_kld(const ActionDistribution& p, const ActionDistribution& q, const nn::KldOptions& options) {
  if (p.size() != q.size()) {
    throw DimensionError(concat("action distributions have ", p.size(), " and ", q.size(), " components"));
  }
  double total = 0.0;
  for (std::size_t c = 0; c < p.size(); ++c) total += nn::kld(p[c], q[c], options);
  return total;
}

}  // namespace

double semantic_information(const ActionDistribution& policy_given_z, const ActionDistribution& marginal) {
  return factorized_kld(policy_given_z, marginal, {});
}

double semantic_effectiveness(const ActionDistribution& ideal, const ActionDistribution& induced,
                              const nn::KldOptions& options) {
  return factorized_kld(ideal, induced, options);
}

SemanticFeedback feedback(double c_t, long episode) {
  if (!(c_t >= 0.0)) fail("semantic effectiveness must be nonnegative, got ", c_t);
  return {1.0 / (1.0 + c_t), episode};
}

double quantize_feedback(double d, int bits) {
  if (bits < 1 || bits > 30) fail("feedback bits must lie in [1,30], got ", bits);
  if (!(d > 0.0 && d <= 1.0)) fail("feedback must lie in (0,1], got ", d);
  const double levels = std::ldexp(1.0, bits) - 1.0;
  return std::max(1.0, std::round(d * levels)) / levels;
}

double semantic_distortion(const Vec& z, const Vec& zhat) {
  if (z.size() != zhat.size()) {
    throw DimensionError(concat("semantic distortion: states of length ", z.size(), " and ", zhat.size()));
  }
  return (z - zhat).squaredNorm();
}

Vec embed(const std::vector<Index>& indices, const Vec& values, Index n) {
  if (static_cast<Index>(indices.size()) != values.size()) {
    throw DimensionError(concat("embed: ", indices.size(), " indices for ", values.size(), " values"));
  }
  Vec out = Vec::Zero(n);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const Index i = indices[k];
    if (i < 0 || i >= n) fail("embed: index ", i, " outside [0,", n, ")");
    out[i] = values[static_cast<Index>(k)];
  }
  return out;
}

void ReliabilityConfig::validate() const {
  if (!(delta > 0.0)) fail("reliability delta must be positive, got ", delta);
  if (!(epsilon > 0.0 && epsilon < 1.0)) fail("reliability epsilon must lie in (0,1), got ", epsilon);
}

Reliability semantic_reliability(const std::vector<double>& distortions, const ReliabilityConfig& config) {
  config.validate();
  if (distortions.empty()) fail("semantic reliability: no records");
  double hits = 0;
  for (double e : distortions) hits += e < config.delta ? 1 : 0;
  Reliability r;
  r.probability = hits / static_cast<double>(distortions.size());
  r.pass = r.probability >= 1.0 - config.epsilon;
  return r;
}

double received_semantic_information(const Vec& prior, const Mat& kernel, const Mat& policy, const Mat& similarity) {
  const Index nz = prior.size();
  if (kernel.rows() != nz || policy.rows() != nz || similarity.cols() != nz || similarity.rows() != kernel.cols()) {
    throw DimensionError("received_semantic_information: alphabet sizes disagree");
  }
  nn::require_distribution(prior, "state prior");
  for (Index z = 0; z < nz; ++z) {
    nn::require_distribution(kernel.row(z).transpose(), "channel kernel row");
    nn::require_distribution(policy.row(z).transpose(), "policy row");
  }
  const Index nh = kernel.cols();
  const Vec marginal = policy.transpose() * prior;
  double total = 0.0;
  for (Index zh = 0; zh < nh; ++zh) {
    Vec post = prior.cwiseProduct(kernel.col(zh));
    const double mass = post.sum();
    if (mass <= 0.0) continue;
    post /= mass;
    const Vec pibar = policy.transpose() * post;
    for (Index z = 0; z < nz; ++z) {
      const double w = prior[z] * kernel(z, zh) * similarity(zh, z);
      if (w == 0.0) continue;
      double inner = 0.0;
      for (Index a = 0; a < policy.cols(); ++a) {
        const double p = policy(z, a);
        if (p > 0.0) inner += p * (std::log(pibar[a]) - std::log(marginal[a]));
      }
      total += w * inner;
    }
  }
  return total;
}

const char* metric_csv_header() { return "episode,snr_db,C_t,d_t,E_t,S_z,bits_sent,payload_bits,channel_uses,success"; }

void write_metric_row(std::ostream& out, const MetricRecord& r) {
  out << r.episode << ',' << r.snr_db << ',' << r.c_t << ',' << r.d_t << ',' << r.e_t << ',' << r.s_z << ','
      << r.bits_sent << ',' << r.payload_bits << ',' << r.channel_uses << ',' << (r.success ? 1 : 0) << '\n';
}

void write_metric_csv(const std::vector<MetricRecord>& records, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail("cannot write ", path.string());
  out.precision(17);
  out << metric_csv_header() << '\n';
  for (const auto& r : records) write_metric_row(out, r);
}

void EfficiencyTally::add(const MetricRecord& r) {
  if (r.bits_sent > 0 && r.channel_uses < 1) fail("record ", r.episode, " sent bits with no channel uses");
  if (r.payload_bits < 0) fail("record ", r.episode, " has negative payload");
  if (r.success) payload_bits += static_cast<double>(r.payload_bits);
  channel_uses += static_cast<double>(r.channel_uses);
}

double EfficiencyTally::value() const {
  if (channel_uses <= 0.0) fail("spectral efficiency: zero channel uses");
  return payload_bits / channel_uses;
}

double spectral_efficiency(const std::vector<MetricRecord>& records) {
  EfficiencyTally t;
  for (const auto& r : records) t.add(r);
  return t.value();
}

}  // namespace tomsc::semantic
