#pragma once

#include "tomsc/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tomsc::scenario {

/// Boolean adjacency; adj(i, j) means i -> j (i at t drives j at t+1).
using Adjacency = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct ScmOptions {
  double weight_min = 0.3;
  double weight_max = 0.9;
  /// Range of the per-variable autoregressive coefficient (diagonal term).
  double self_min = 0.2;
  double self_max = 0.5;
  double noise_sigma = 0.1;
  int max_tries = 1000;
};

/// Linear lag-1 structural causal model over a DAG.
struct GroundTruthScm {
  Index n = 0;
  Adjacency adjacency;
  Mat weights;           ///< weights(i, j) for edge i -> j, zero elsewhere
  Vec self_weights;      ///< diagonal autoregressive terms
  double noise_sigma = 0.1;
  std::uint64_t seed = 0;
  std::vector<Index> order;  ///< a topological order

  /// x^{t+1} = transition() * x^t + noise.
  Mat transition() const;
  double spectral_radius() const;
  /// Number of parents of each variable.
  std::vector<int> parent_counts() const;
  Index edge_count() const;
};

GroundTruthScm generate_scm(Index n, double density, std::uint64_t seed, const ScmOptions& options = {});

/// True iff the adjacency has no directed cycle (self loops count as cycles).
bool is_acyclic(const Adjacency& adj);

/// One sample is T x N (rows are time steps).
struct Dataset {
  std::vector<Mat> samples;
  Index n() const { return samples.empty() ? 0 : samples.front().cols(); }
  Index steps() const { return samples.empty() ? 0 : samples.front().rows(); }
};

struct TimeseriesOptions {
  int burn_in = 50;
  double blowup_limit = 1e6;
};

Dataset generate_timeseries(const GroundTruthScm& scm, int samples, int steps, Rng& rng,
                            const TimeseriesOptions& options = {});

/// Columnar text with header `sample,t,series,value`.
void write_dataset_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path);

std::string scm_to_json(const GroundTruthScm& scm);
GroundTruthScm scm_from_json(const std::string& text);

}  // namespace tomsc::scenario
