#include "tomsc/scenario/scm.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tomsc::scenario {

Mat GroundTruthScm::transition() const {
  Mat m = weights.transpose();
  m.diagonal() += self_weights;
  return m;
}

double GroundTruthScm::spectral_radius() const {
  Eigen::EigenSolver<Mat> es(transition(), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<int> GroundTruthScm::parent_counts() const {
  std::vector<int> out(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(j)] += adjacency(i, j) ? 1 : 0;
  return out;
}

Index GroundTruthScm::edge_count() const { return adjacency.count(); }

bool is_acyclic(const Adjacency& adj) {
  const Index n = adj.rows();
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) indeg[static_cast<std::size_t>(j)] += adj(i, j) ? 1 : 0;
  std::vector<Index> ready;
  for (Index i = 0; i < n; ++i)
    if (indeg[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  Index seen = 0;
  while (!ready.empty()) {
    const Index i = ready.back();
    ready.pop_back();
    ++seen;
    for (Index j = 0; j < n; ++j) {
      if (adj(i, j) && --indeg[static_cast<std::size_t>(j)] == 0) ready.push_back(j);
    }
  }
  return seen == n;
}

GroundTruthScm generate_scm(Index n, double density, std::uint64_t seed, const ScmOptions& options) {
  if (n < 2) fail("generate_scm: need at least 2 variables, got ", n);
  if (!(density > 0.0) || density > 1.0) fail("generate_scm: edge density must lie in (0,1], got ", density);
  if (options.weight_min < 0 || options.weight_max < options.weight_min) fail("generate_scm: bad weight range");
  Rng rng(seed);
  std::uniform_real_distribution<double> mag(options.weight_min, options.weight_max);
  std::uniform_real_distribution<double> self(options.self_min, options.self_max);
  for (int attempt = 0; attempt < options.max_tries; ++attempt) {
    GroundTruthScm scm;
    scm.n = n;
    scm.seed = seed;
    scm.noise_sigma = options.noise_sigma;
    scm.order.resize(static_cast<std::size_t>(n));
    std::iota(scm.order.begin(), scm.order.end(), Index{0});
    std::shuffle(scm.order.begin(), scm.order.end(), rng);
    scm.adjacency = Adjacency::Constant(n, n, false);
    scm.weights = Mat::Zero(n, n);
    for (Index a = 0; a < n; ++a) {
      for (Index b = a + 1; b < n; ++b) {
        if (uniform01(rng) >= density) continue;
        const Index i = scm.order[static_cast<std::size_t>(a)];
        const Index j = scm.order[static_cast<std::size_t>(b)];
        scm.adjacency(i, j) = true;
        scm.weights(i, j) = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * mag(rng);
      }
    }
    scm.self_weights = Vec(n);
    for (Index i = 0; i < n; ++i) scm.self_weights[i] = self(rng);
    if (scm.edge_count() == 0) continue;
    if (scm.spectral_radius() >= 1.0) continue;
    return scm;
  }
  fail("generate_scm: no stationary non-empty DAG found after ", options.max_tries, " tries");
}

Dataset generate_timeseries(const GroundTruthScm& scm, int samples, int steps, Rng& rng,
                            const TimeseriesOptions& options) {
  if (samples < 1) fail("generate_timeseries: need at least one sample");
  if (steps < 2) fail("generate_timeseries: need T >= 2, got ", steps);
  const Mat m = scm.transition();
  Dataset data;
  data.samples.reserve(static_cast<std::size_t>(samples));
  for (int s = 0; s < samples; ++s) {
    Mat out(steps, scm.n);
    Vec x = Vec::Zero(scm.n);
    for (int t = -options.burn_in; t < steps; ++t) {
      Vec next = m * x;
      for (Index i = 0; i < scm.n; ++i) next[i] += scm.noise_sigma * standard_normal(rng);
      x = std::move(next);
      if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.blowup_limit) {
        fail("generate_timeseries: series diverged at sample ", s, " step ", t);
      }
      if (t >= 0) out.row(t) = x.transpose();
    }
    data.samples.push_back(std::move(out));
  }
  return data;
}

void write_dataset_csv(const Dataset& data, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail("cannot write ", path.string());
  out << "sample,t,series,value\n";
  out.precision(17);
  for (std::size_t s = 0; s < data.samples.size(); ++s) {
    const Mat& m = data.samples[s];
    for (Index t = 0; t < m.rows(); ++t)
      for (Index i = 0; i < m.cols(); ++i) out << s << ',' << t << ',' << i << ',' << m(t, i) << '\n';
  }
}

Dataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read ", path.string());
  std::string line;
  std::getline(in, line);
  if (line != "sample,t,series,value") fail(path.string(), ": unexpected header '", line, "'");
  struct Row {
    long s, t, i;
    double v;
  };
  std::vector<Row> rows;
  long max_s = -1, max_t = -1, max_i = -1;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Row r{};
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(ss >> r.s >> c1 >> r.t >> c2 >> r.i >> c3 >> r.v) || c1 != ',' || c2 != ',' || c3 != ',') {
      fail(path.string(), ":", lineno, ": malformed row");
    }
    max_s = std::max(max_s, r.s);
    max_t = std::max(max_t, r.t);
    max_i = std::max(max_i, r.i);
    rows.push_back(r);
  }
  Dataset d;
  d.samples.assign(static_cast<std::size_t>(max_s + 1), Mat::Constant(max_t + 1, max_i + 1, std::nan("")));
  for (const auto& r : rows) d.samples[static_cast<std::size_t>(r.s)](r.t, r.i) = r.v;
  for (const auto& m : d.samples)
    if (!m.allFinite()) fail(path.string(), ": dataset has missing entries");
  return d;
}

std::string scm_to_json(const GroundTruthScm& scm) {
  nlohmann::json j;
  j["n"] = scm.n;
  j["seed"] = scm.seed;
  j["noise_sigma"] = scm.noise_sigma;
  std::vector<nlohmann::json> edges;
  for (Index i = 0; i < scm.n; ++i)
    for (Index k = 0; k < scm.n; ++k)
      if (scm.adjacency(i, k)) edges.push_back({{"from", i}, {"to", k}, {"weight", scm.weights(i, k)}});
  j["edges"] = edges;
  j["self_weights"] = std::vector<double>(scm.self_weights.data(), scm.self_weights.data() + scm.n);
  j["order"] = scm.order;
  return j.dump(1);
}

GroundTruthScm scm_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  GroundTruthScm scm;
  scm.n = j.at("n").get<Index>();
  scm.seed = j.at("seed").get<std::uint64_t>();
  scm.noise_sigma = j.at("noise_sigma").get<double>();
  scm.adjacency = Adjacency::Constant(scm.n, scm.n, false);
  scm.weights = Mat::Zero(scm.n, scm.n);
  for (const auto& e : j.at("edges")) {
    const Index a = e.at("from").get<Index>(), b = e.at("to").get<Index>();
    scm.adjacency(a, b) = true;
    scm.weights(a, b) = e.at("weight").get<double>();
  }
  const auto sw = j.at("self_weights").get<std::vector<double>>();
  scm.self_weights = Eigen::Map<const Vec>(sw.data(), static_cast<Index>(sw.size()));
  scm.order = j.at("order").get<std::vector<Index>>();
  if (!is_acyclic(scm.adjacency)) fail("scm manifest describes a cyclic graph");
  return scm;
}

}  // namespace tomsc::scenario
