#include "tomsc/causal/discovery.hpp"

#include "tomsc/nn/prob.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace tomsc::causal {

using nn::Tape;
using nn::Var;

namespace {

constexpr double kMaskLogit = -1e4;
constexpr int kFeatures = 8;

}  // namespace

std::vector<int> CausalGraph::parent_counts() const {
  std::vector<int> out(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(j)] += adjacency(i, j) ? 1 : 0;
  return out;
}

std::vector<Index> CausalGraph::connected() const {
  std::vector<Index> out;
  for (Index v = 0; v < n; ++v) {
    if (adjacency.row(v).any() || adjacency.col(v).any()) out.push_back(v);
  }
  return out;
}

CausalGraph threshold_graph(std::vector<Mat> probs, double threshold) {
  if (probs.empty()) fail("threshold_graph: empty posterior");
  CausalGraph g;
  g.n = probs[0].rows();
  g.probs = std::move(probs);
  g.adjacency = scenario::Adjacency::Constant(g.n, g.n, false);
  for (Index i = 0; i < g.n; ++i)
    for (Index j = 0; j < g.n; ++j) g.adjacency(i, j) = i != j && g.probs[0](i, j) < threshold;
  return g;
}

CausalState extract_state(const CausalGraph& graph, const Vec& observation) {
  if (observation.size() != graph.n) {
    throw DimensionError(concat("extract_state: observation has ", observation.size(), " entries for ", graph.n,
                                " variables"));
  }
  CausalState s;
  s.retained = graph.connected();
  if (s.retained.empty()) fail("empty semantic state: the causal graph has no edges");
  const auto counts = graph.parent_counts();
  s.values.resize(s.dimension());
  for (Index k = 0; k < s.dimension(); ++k) {
    const Index v = s.retained[static_cast<std::size_t>(k)];
    s.values[k] = observation[v];
    s.parents.push_back(counts[static_cast<std::size_t>(v)]);
  }
  return s;
}

Mat gumbel_noise(Index rows, Index cols, Rng& rng) {
  Mat g(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) {
      double u = uniform01(rng);
      u = std::clamp(u, 1e-300, 1.0 - 1e-16);
      g(i, j) = -std::log(-std::log(u));
    }
  }
  return g;
}

Mat sample_edges(const Mat& logits, double temperature, Rng& rng) {
  if (!(temperature > 0.0)) fail("sample_edges: temperature must be positive, got ", temperature);
  Mat y = logits + gumbel_noise(logits.rows(), logits.cols(), rng);
  Mat out(logits.rows(), logits.cols());
  for (Index r = 0; r < y.rows(); ++r) out.row(r) = nn::softmax(y.row(r).transpose(), temperature).transpose();
  return out;
}

DiscoveryModel::DiscoveryModel(Index n, const DiscoveryConfig& config, Rng& rng) : n_(n), config_(config) {
  if (n < 2) fail("causal discovery needs at least 2 series, got ", n);
  if (config.edge_types < 2) fail("edge_types must be at least 2");
  if (!(config.sigma2 > 0.0)) fail("observation variance must be positive, got ", config.sigma2);
  if (!(config.no_edge_prior > 0.0 && config.no_edge_prior < 1.0)) fail("no-edge prior must lie in (0,1)");
  mean_ = Vec::Zero(n);
  scale_ = Vec::Ones(n);
  const Index h = config.hidden;
  edge_in_ = nn::Mlp("enc.edge1", {kFeatures, h, h}, nn::Activation::tanh, nn::Init::xavier, rng);
  edge_out_ = nn::Mlp("enc.edge2", {3 * h, h, config.edge_types}, nn::Activation::tanh, nn::Init::zero, rng);
  for (int e = 1; e < config.edge_types; ++e) {
    msg_src_.emplace_back(concat("dec.src", e), Mat::Zero(n, n));
    msg_bias_.emplace_back(concat("dec.bias", e), Mat::Zero(n, n));
  }
  node_msg_ = nn::Parameter("dec.node_msg", Mat::Ones(1, n));
  node_self_ = nn::Parameter("dec.node_self", Mat::Zero(1, n));
  node_bias_ = nn::Parameter("dec.node_bias", Mat::Zero(1, n));
  log_sigma2_ = nn::Parameter("dec.log_sigma2", Mat::Constant(1, 1, std::log(config.sigma2)));
}

int DiscoveryModel::feature_dim() const { return kFeatures; }

void DiscoveryModel::set_scaler(Vec mean, Vec scale) {
  if (mean.size() != n_ || scale.size() != n_) throw DimensionError("scaler size does not match series count");
  if ((scale.array() <= 0.0).any()) fail("scaler has a non-positive scale");
  mean_ = std::move(mean);
  scale_ = std::move(scale);
}

Mat DiscoveryModel::standardize(const Mat& sample) const {
  if (sample.cols() != n_) {
    throw DimensionError(concat("sample has ", sample.cols(), " series, model expects ", n_));
  }
  if (sample.rows() < 2) fail("sample needs T >= 2");
  if (!sample.allFinite()) fail("sample contains non-finite values");
  Mat out = sample.rowwise() - mean_.transpose();
  return out.array().rowwise() / scale_.transpose().array();
}

Mat DiscoveryModel::pair_features(const Mat& x) const {
  const Index m = x.rows() - 1;
  const Mat x0 = x.topRows(m), x1 = x.bottomRows(m);
  const Mat c = x0.transpose() * x1 / static_cast<double>(m);
  const Mat r = x0.transpose() * x0 / static_cast<double>(m);
  const Mat b = (r + config_.ridge * Mat::Identity(n_, n_)).ldlt().solve(c);
  Mat f(n_ * n_, kFeatures);
  for (Index i = 0; i < n_; ++i) {
    for (Index j = 0; j < n_; ++j) {
      auto row = f.row(i * n_ + j);
      row << c(i, j), c(j, i), r(i, j), b(i, j), b(j, i), b(i, j) * b(i, j) * 4.0, b(j, i) * b(j, i) * 4.0,
          c(i, j) * c(i, j);
    }
  }
  return f;
}

const nn::SparseMat& DiscoveryModel::aggregation(Index samples, int which) {
  if (cached_samples_ != samples) {
    const Index n = n_, nn2 = n_ * n_;
    const double w = 1.0 / static_cast<double>(n - 1);
    std::vector<Eigen::Triplet<double>> gin, gout, sin, sout;
    for (Index s = 0; s < samples; ++s) {
      for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
          const Index e = s * nn2 + i * n + j;
          sin.emplace_back(e, s * n + j, 1.0);
          sout.emplace_back(e, s * n + i, 1.0);
          if (i == j) continue;
          gin.emplace_back(s * n + j, e, w);
          gout.emplace_back(s * n + i, e, w);
        }
      }
    }
    auto build = [&](nn::SparseMat& m, Index r, Index c, const std::vector<Eigen::Triplet<double>>& t) {
      m.resize(r, c);
      m.setFromTriplets(t.begin(), t.end());
    };
    build(gather_in_, samples * n, samples * nn2, gin);
    build(gather_out_, samples * n, samples * nn2, gout);
    build(spread_in_, samples * nn2, samples * n, sin);
    build(spread_out_, samples * nn2, samples * n, sout);
    cached_samples_ = samples;
  }
  switch (which) {
    case 0: return gather_in_;
    case 1: return gather_out_;
    case 2: return spread_in_;
    default: return spread_out_;
  }
}

Mat DiscoveryModel::diagonal_mask(Index samples) const {
  Mat mask = Mat::Zero(samples * n_ * n_, config_.edge_types);
  for (Index s = 0; s < samples; ++s)
    for (Index i = 0; i < n_; ++i) mask.block(s * n_ * n_ + i * n_ + i, 1, 1, config_.edge_types - 1).setConstant(kMaskLogit);
  return mask;
}

Var DiscoveryModel::encode(Tape& tape, const Mat& stacked, Index samples) {
  if (stacked.rows() != samples * n_ * n_ || stacked.cols() != kFeatures) {
    throw DimensionError(concat("encoder features ", stacked.rows(), "x", stacked.cols(), " for ", samples,
                                " samples of ", n_, " series"));
  }
  Var h = nn::tanh(edge_in_.forward(tape, tape.constant(stacked)));
  Var in_nodes = nn::matmul_sparse(aggregation(samples, 0), h);
  Var out_nodes = nn::matmul_sparse(aggregation(samples, 1), h);
  Var in_edges = nn::matmul_sparse(aggregation(samples, 2), in_nodes);
  Var out_edges = nn::matmul_sparse(aggregation(samples, 3), out_nodes);
  Var logits = edge_out_.forward(tape, nn::concat_cols({h, in_edges, out_edges}));
  return logits + tape.constant(diagonal_mask(samples));
}

Mat DiscoveryModel::encode_graph(const Mat& sample) {
  if (n_ < 2) fail("causal discovery needs at least 2 series");
  Tape tape;
  return encode(tape, pair_features(standardize(sample)), 1).value();
}

double DiscoveryModel::sigma2() const {
  return config_.learn_sigma2 ? std::exp(log_sigma2_.value()(0, 0)) : config_.sigma2;
}

Vec DiscoveryModel::prior() const {
  Vec p(config_.edge_types);
  p[0] = config_.no_edge_prior;
  p.tail(config_.edge_types - 1).setConstant((1.0 - config_.no_edge_prior) / (config_.edge_types - 1));
  return p;
}

Var DiscoveryModel::decode(Tape& tape, const Mat& x, const Var& edges) {
  const Index m = x.rows() - 1;
  Var o0 = tape.constant(x.topRows(m));
  Var msg;
  for (int e = 1; e < config_.edge_types; ++e) {
    const auto k = static_cast<std::size_t>(e - 1);
    Var z = nn::reshape(nn::slice_cols(edges, e, 1), n_, n_);
    Var term = nn::matmul(o0, z * tape.param(msg_src_[k])) + nn::sum_rows(z * tape.param(msg_bias_[k]));
    msg = msg.valid() ? msg + term : term;
  }
  return o0 + msg * tape.param(node_msg_) + o0 * tape.param(node_self_) + tape.param(node_bias_);
}

Vec DiscoveryModel::decode_step(const Vec& o, const Mat& edges) {
  if (o.size() != n_) throw DimensionError(concat("decode_step: ", o.size(), " values for ", n_, " series"));
  if (edges.rows() != n_ * n_ || edges.cols() != config_.edge_types) {
    throw DimensionError(concat("decode_step: edges ", edges.rows(), "x", edges.cols()));
  }
  for (Index r = 0; r < edges.rows(); ++r) {
    if (std::abs(edges.row(r).sum() - 1.0) > 1e-9) fail("decode_step: edge row ", r, " is not normalized");
  }
  Mat x(2, n_);
  x.row(0) = o.transpose();
  x.row(1).setZero();
  Tape tape;
  return decode(tape, x, tape.constant(edges)).value().row(0).transpose();
}

Var DiscoveryModel::negative_elbo(Tape& tape, const std::vector<Mat>& xs, const std::vector<Mat>& noise,
                                  double temperature, ElboParts* parts) {
  const auto samples = static_cast<Index>(xs.size());
  if (samples == 0) fail("negative_elbo: no samples");
  if (!noise.empty() && noise.size() != xs.size()) fail("negative_elbo: noise count does not match samples");
  const Index nn2 = n_ * n_;
  Mat stacked(samples * nn2, kFeatures);
  for (Index s = 0; s < samples; ++s) stacked.middleRows(s * nn2, nn2) = pair_features(xs[static_cast<std::size_t>(s)]);
  Var logits = encode(tape, stacked, samples);

  Vec logp = prior().array().log();
  Mat logprior = logp.transpose().replicate(nn2, 1);
  Mat offdiag = Mat::Ones(nn2, 1);
  for (Index i = 0; i < n_; ++i) offdiag(i * n_ + i, 0) = 0.0;

  Var log_sigma2 = config_.learn_sigma2 ? tape.param(log_sigma2_) : tape.constant(std::log(config_.sigma2));
  Var total_ll, total_kl;
  for (Index s = 0; s < samples; ++s) {
    const Mat& x = xs[static_cast<std::size_t>(s)];
    Var l = nn::slice_rows(logits, s * nn2, nn2);
    Var q = nn::softmax_rows(l);
    Var logq = nn::log_softmax_rows(l);
    Var kl = nn::sum(nn::sum_cols(q * (logq - tape.constant(logprior))) * tape.constant(offdiag));
    Var edges = noise.empty() ? q : nn::softmax_rows(l + tape.constant(noise[static_cast<std::size_t>(s)]), temperature);
    Var mu = decode(tape, x, edges);
    const Index m = x.rows() - 1;
    const double terms = static_cast<double>(m * n_);
    Var sse = nn::sum(nn::square(tape.constant(x.bottomRows(m)) - mu));
    Var ll = nn::scale(nn::add_scalar(log_sigma2, std::log(2.0 * M_PI)), -0.5 * terms) -
             nn::scale(sse * nn::exp(-log_sigma2), 0.5);
    total_ll = total_ll.valid() ? total_ll + ll : ll;
    total_kl = total_kl.valid() ? total_kl + kl : kl;
  }
  if (parts) {
    parts->log_likelihood = total_ll.scalar() / static_cast<double>(samples);
    parts->kl = total_kl.scalar() / static_cast<double>(samples);
  }
  return nn::scale(total_kl - total_ll, 1.0 / static_cast<double>(samples));
}

ElboParts DiscoveryModel::evaluate_elbo(const std::vector<Mat>& samples) {
  std::vector<Mat> xs;
  for (const auto& s : samples) xs.push_back(standardize(s));
  Tape tape;
  ElboParts parts;
  negative_elbo(tape, xs, {}, 1.0, &parts);
  return parts;
}

ElboParts DiscoveryModel::elbo(const Mat& x, const Mat& posterior, const Vec& prior_dist) {
  if (posterior.rows() != n_ * n_ || posterior.cols() != config_.edge_types) {
    throw DimensionError("elbo: posterior shape does not match model");
  }
  const double s2 = sigma2();
  if (!(s2 > 0.0)) fail("elbo: observation variance must be positive");
  Tape tape;
  Var mu = decode(tape, x, tape.constant(posterior));
  const Index m = x.rows() - 1;
  const double sse = (x.bottomRows(m) - mu.value()).squaredNorm();
  ElboParts parts;
  parts.log_likelihood = -0.5 * static_cast<double>(m * n_) * std::log(2.0 * M_PI * s2) - sse / (2.0 * s2);
  for (Index i = 0; i < n_; ++i) {
    for (Index j = 0; j < n_; ++j) {
      if (i == j) continue;
      parts.kl += nn::kld(posterior.row(i * n_ + j).transpose(), prior_dist);
    }
  }
  return parts;
}

CausalGraph DiscoveryModel::infer_graph(const std::vector<Mat>& samples) {
  if (samples.empty()) fail("infer_graph: no samples");
  std::vector<Mat> probs(static_cast<std::size_t>(config_.edge_types), Mat::Zero(n_, n_));
  for (const auto& s : samples) {
    const Mat logits = encode_graph(s);
    for (Index i = 0; i < n_; ++i) {
      for (Index j = 0; j < n_; ++j) {
        const Vec p = nn::softmax(logits.row(i * n_ + j).transpose());
        for (int e = 0; e < config_.edge_types; ++e) probs[static_cast<std::size_t>(e)](i, j) += p[e];
      }
    }
  }
  for (auto& p : probs) p /= static_cast<double>(samples.size());
  for (Index i = 0; i < n_; ++i) {
    probs[0](i, i) = 1.0;
    for (int e = 1; e < config_.edge_types; ++e) probs[static_cast<std::size_t>(e)](i, i) = 0.0;
  }
  return threshold_graph(std::move(probs), config_.threshold);
}

nn::ParameterList DiscoveryModel::encoder_parameters() {
  auto a = edge_in_.parameters();
  for (auto* p : edge_out_.parameters()) a.push_back(p);
  return a;
}

nn::ParameterList DiscoveryModel::decoder_parameters() {
  nn::ParameterList out;
  for (std::size_t k = 0; k < msg_src_.size(); ++k) {
    out.push_back(&msg_src_[k]);
    out.push_back(&msg_bias_[k]);
  }
  out.push_back(&node_msg_);
  out.push_back(&node_self_);
  out.push_back(&node_bias_);
  if (config_.learn_sigma2) out.push_back(&log_sigma2_);
  return out;
}

nn::ParameterList DiscoveryModel::parameters() {
  auto a = encoder_parameters();
  for (auto* p : decoder_parameters()) a.push_back(p);
  return a;
}

DiscoveryResult train_discovery(const scenario::Dataset& data, const DiscoveryConfig& config, Rng& rng) {
  if (data.samples.empty()) fail("train_discovery: empty dataset");
  if (config.epochs < 1) fail("train_discovery: epochs must be >= 1");
  const Index n = data.n();
  DiscoveryResult result;
  result.model = DiscoveryModel(n, config, rng);
  DiscoveryModel& model = result.model;

  // Per-variable standardization over the whole dataset.
  Vec mean = Vec::Zero(n), sq = Vec::Zero(n);
  double count = 0;
  for (const auto& s : data.samples) {
    mean += s.colwise().sum().transpose();
    sq += s.array().square().colwise().sum().matrix().transpose();
    count += static_cast<double>(s.rows());
  }
  mean /= count;
  Vec var = sq / count - mean.cwiseProduct(mean);
  model.set_scaler(mean, var.cwiseMax(1e-12).cwiseSqrt());

  std::vector<std::size_t> idx(data.samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  auto holdout = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(idx.size())));
  if (holdout >= idx.size()) holdout = idx.size() - 1;
  std::vector<Mat> train, held;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    Mat x = model.standardize(data.samples[idx[k]]);
    (k < holdout ? held : train).push_back(std::move(x));
  }
  auto heldout_elbo = [&] {
    if (held.empty()) return 0.0;
    Tape tape;
    ElboParts parts;
    model.negative_elbo(tape, held, {}, 1.0, &parts);
    return parts.value();
  };
  result.heldout_elbo_before = heldout_elbo();

  nn::OptimizerConfig oc;
  oc.kind = config.optimizer;
  nn::Optimizer opt(model.parameters(), oc);
  const Index nn2 = n * n;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double frac = config.epochs > 1 ? static_cast<double>(epoch) / (config.epochs - 1) : 1.0;
    const double tau = config.tau_start * std::pow(config.tau_end / config.tau_start, frac);
    std::vector<Mat> noise;
    noise.reserve(train.size());
    for (std::size_t s = 0; s < train.size(); ++s) noise.push_back(gumbel_noise(nn2, config.edge_types, rng));
    opt.zero_grad();
    Tape tape;
    Var loss = model.negative_elbo(tape, train, noise, tau);
    const double value = loss.scalar();
    if (!std::isfinite(value)) fail("causal discovery diverged at epoch ", epoch, " (loss ", value, ")");
    result.loss_history.push_back(value);
    tape.backward(loss);
    opt.step(config.learning_rate);
  }
  result.heldout_elbo_after = heldout_elbo();
  result.graph = model.infer_graph(data.samples);
  return result;
}

double auroc(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) fail("auroc: ", scores.size(), " scores for ", labels.size(), " labels");
  double pos = 0, neg = 0, credit = 0;
  for (std::size_t a = 0; a < scores.size(); ++a) {
    if (!labels[a]) continue;
    pos += 1;
    for (std::size_t b = 0; b < scores.size(); ++b) {
      if (labels[b]) continue;
      if (scores[a] > scores[b]) credit += 1.0;
      else if (scores[a] == scores[b]) credit += 0.5;
    }
  }
  for (bool l : labels) neg += l ? 0 : 1;
  if (pos == 0 || neg == 0) fail("auroc: needs both positive and negative labels");
  return credit / (pos * neg);
}

RecoveryScore score_recovery(const CausalGraph& graph, const scenario::Adjacency& truth) {
  if (truth.rows() != graph.n) throw DimensionError("score_recovery: graph sizes differ");
  std::vector<double> scores;
  std::vector<bool> labels;
  double correct = 0;
  const Mat p = graph.edge_probability();
  for (Index i = 0; i < graph.n; ++i) {
    for (Index j = 0; j < graph.n; ++j) {
      if (i == j) continue;
      scores.push_back(p(i, j));
      labels.push_back(truth(i, j));
      correct += graph.adjacency(i, j) == truth(i, j) ? 1 : 0;
    }
  }
  RecoveryScore r;
  r.accuracy = correct / static_cast<double>(scores.size());
  const bool mixed = std::find(labels.begin(), labels.end(), true) != labels.end() &&
                     std::find(labels.begin(), labels.end(), false) != labels.end();
  r.auroc = mixed ? auroc(scores, labels) : std::nan("");
  return r;
}

void write_edge_list(const CausalGraph& graph, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail("cannot write ", path.string());
  out << "from,to,posterior\n";
  out.precision(17);
  const Mat p = graph.edge_probability();
  for (Index i = 0; i < graph.n; ++i)
    for (Index j = 0; j < graph.n; ++j)
      if (i != j) out << i << ',' << j << ',' << p(i, j) << '\n';
}

}  // namespace tomsc::causal
