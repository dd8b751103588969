// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Figure criteria share a checkpoint cache
// under TOMSC_ACCEPTANCE_DIR (default: ./acceptance_out).

#include "tomsc/agents/belief.hpp"
#include "tomsc/agents/objective.hpp"
#include "tomsc/causal/discovery.hpp"
#include "tomsc/exp/config.hpp"
#include "tomsc/exp/figures.hpp"
#include "tomsc/nn/layers.hpp"
#include "tomsc/nn/prob.hpp"
#include "tomsc/phy/channel.hpp"
#include "tomsc/scenario/oracle.hpp"
#include "tomsc/scenario/scm.hpp"
#include "tomsc/semantic/metrics.hpp"
#include "tomsc/semantic/toy_pipeline.hpp"
#include "tomsc/train/losses.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace tomsc;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double budget_seconds;  // 0 = no runtime bound
  std::function<Outcome()> run;
};

std::string num(double x, int digits = 4) {
  std::ostringstream s;
  s << std::setprecision(digits) << x;
  return s.str();
}

fs::path work_dir() {
  const char* env = std::getenv("TOMSC_ACCEPTANCE_DIR");
  return env && *env ? fs::path(env) : fs::path("acceptance_out");
}

Mat random_mat(Index r, Index c, Rng& rng, double scale = 1.0) {
  Mat m(r, c);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = scale * standard_normal(rng);
  return m;
}

Vec random_simplex(Index n, Rng& rng) {
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = -std::log(1.0 - uniform01(rng)) + 1e-12;
  return v / v.sum();
}

// ---------------------------------------------------------------- criterion 1

Outcome channel_fidelity() {
  // Every bit gets its own frame so fades are independent across bits.
  const long bits = 1000000;
  const auto bpsk = phy::Constellation::bpsk();
  Rng rng(1001);
  bool ok = true;
  std::string detail;
  for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0}) {
    long errors = 0;
    phy::Bits tx(1);
    for (long i = 0; i < bits; ++i) {
      tx[0] = static_cast<std::uint8_t>(uniform01(rng) < 0.5);
      phy::ChannelRealization r;
      const auto y = phy::transmit(phy::modulate(tx, bpsk), snr, rng, r);
      errors += phy::demodulate(y, r, bpsk)[0] != tx[0];
    }
    const double g = std::pow(10.0, snr / 10.0);
    const double p = 0.5 * (1.0 - std::sqrt(g / (1.0 + g)));
    const double se = std::sqrt(p * (1.0 - p) / bits);
    const double ber = static_cast<double>(errors) / bits;
    const double z = (ber - p) / se;
    ok = ok && std::abs(z) <= 3.0;
    detail += concat(snr, "dB ", num(ber), " (z=", num(z, 2), ") ");
  }
  // Reference values quoted for the closed form.
  const auto closed = [](double snr) {
    const double g = std::pow(10.0, snr / 10.0);
    return 0.5 * (1.0 - std::sqrt(g / (1.0 + g)));
  };
  ok = ok && std::abs(closed(0.0) - 0.1464) < 5e-5 && std::abs(closed(10.0) - 0.0233) < 5e-5;
  return {ok, detail};
}

// ---------------------------------------------------------------- criterion 2

// Worst relative error between tape gradients and central differences.
double gradient_error(const nn::ParameterList& params, const std::function<nn::Var(nn::Tape&)>& build) {
  nn::zero_grads(params);
  {
    nn::Tape t;
    t.backward(build(t));
  }
  const double h = 1e-5;
  double worst = 0.0;
  for (auto* p : params) {
    const Mat analytic = p->grad();
    for (Index k = 0; k < analytic.size(); ++k) {
      Mat d = Mat::Zero(analytic.rows(), analytic.cols());
      d.data()[k] = h;
      auto eval = [&] {
        nn::Tape t;
        return build(t).scalar();
      };
      p->apply_delta(d);
      const double up = eval();
      p->apply_delta(-2.0 * d);
      const double down = eval();
      p->apply_delta(d);
      const double fd = (up - down) / (2.0 * h);
      const double a = analytic.data()[k];
      worst = std::max(worst, std::abs(fd - a) / std::max({std::abs(fd), std::abs(a), 1e-6}));
    }
  }
  return worst;
}

Outcome differentiation() {
  const int configs = 10;
  std::map<std::string, double> worst;
  auto note = [&](const std::string& k, double e) { worst[k] = std::max(worst[k], e); };
  const nn::Activation acts[] = {nn::Activation::identity, nn::Activation::tanh, nn::Activation::relu,
                                 nn::Activation::sigmoid};
  for (int c = 0; c < configs; ++c) {
    Rng rng(2000 + c);
    const Index in = 2 + c % 4;
    const Index out = 2 + (c * 3) % 5;
    const Index batch = 3 + c % 3;
    const Mat x = random_mat(batch, in, rng);

    nn::DenseLayer dense("d", in, out, acts[c % 4], nn::Init::xavier, rng);
    dense.bias().set_value(random_mat(1, out, rng, 0.3));
    const Mat target = random_mat(batch, out, rng);
    note("dense", gradient_error(dense.parameters(), [&](nn::Tape& t) {
           return nn::mean(nn::square(dense.forward(t, t.constant(x)) - t.constant(target)));
         }));

    nn::GruCell gru("g", in, 2 + c % 3, rng);
    const Mat h0 = random_mat(batch, gru.hidden_dim(), rng, 0.5);
    note("gru", gradient_error(gru.parameters(), [&](nn::Tape& t) {
           nn::Var h = gru.forward(t, t.constant(x), t.constant(h0));
           h = gru.forward(t, t.constant(x * -0.7), h);
           return nn::sum(nn::square(h));
         }));

    causal::DiscoveryConfig dcfg;
    dcfg.hidden = 4 + c % 3;
    dcfg.learn_sigma2 = c % 2 == 1;
    causal::DiscoveryModel model(3, dcfg, rng);
    for (auto* p : model.parameters()) p->set_value(p->value() + random_mat(p->rows(), p->cols(), rng, 0.3));
    std::vector<Mat> xs, noise;
    for (int s = 0; s < 2; ++s) {
      xs.push_back(random_mat(6, 3, rng));
      noise.push_back(causal::gumbel_noise(9, dcfg.edge_types, rng));
    }
    note("elbo", gradient_error(model.parameters(), [&](nn::Tape& t) {
           return model.negative_elbo(t, xs, noise, 0.8);
         }));

    nn::DenseLayer qhead("q", in, 1, nn::Activation::identity, nn::Init::xavier, rng);
    Vec q_targets(batch);
    for (Index i = 0; i < batch; ++i) q_targets(i) = standard_normal(rng);
    note("loss_q", gradient_error(qhead.parameters(), [&](nn::Tape& t) {
           return train::loss_q(qhead.forward(t, t.constant(x)), q_targets);
         }));

    nn::DenseLayer pi("pi", in, 3, nn::Activation::identity, nn::Init::xavier, rng);
    std::vector<int> actions;
    for (Index i = 0; i < batch; ++i) actions.push_back(static_cast<int>(std::uniform_int_distribution<int>(0, 2)(rng)));
    note("loss_partner", gradient_error(pi.parameters(), [&](nn::Tape& t) {
           return train::loss_partner_policy(nn::log_softmax_rows(pi.forward(t, t.constant(x))), actions);
         }));

    nn::DenseLayer bel("f", in, 4, nn::Activation::identity, nn::Init::xavier, rng);
    Mat belief_targets(batch, 4);
    for (Index i = 0; i < batch; ++i) belief_targets.row(i) = random_simplex(4, rng).transpose();
    note("loss_belief", gradient_error(bel.parameters(), [&](nn::Tape& t) {
           return train::loss_belief(nn::log_softmax_rows(bel.forward(t, t.constant(x))), belief_targets);
         }));

    agents::P2Config p2;
    p2.lambda = 0.3 + 0.2 * c;
    nn::Parameter logits("l", random_mat(3, 4, rng));
    nn::Parameter dist("e", (Mat::Constant(5, 1, 0.5) + random_mat(5, 1, rng, 0.1)).eval());
    Mat ideal(3, 4);
    for (Index r = 0; r < 3; ++r) ideal.row(r) = random_simplex(4, rng).transpose();
    note("p2", gradient_error({&logits, &dist}, [&](nn::Tape& t) {
           return agents::receiver_objective(nn::log_softmax_rows(t.param(logits)), ideal, t.param(dist), p2);
         }));
  }
  bool ok = true;
  std::string detail = concat(configs, " configs, worst rel err:");
  for (const auto& [k, e] : worst) {
    ok = ok && e < 1e-3;
    detail += concat(" ", k, "=", num(e, 2));
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- criterion 3

Outcome discovery() {
  const causal::DiscoveryConfig fit;
  double acc = 0.0, auc = 0.0;
  const int seeds = 10;
  for (int s = 0; s < seeds; ++s) {
    const auto scm = scenario::generate_scm(5, 0.5, static_cast<std::uint64_t>(s));
    Rng data_rng(derive_seed(3001, s));
    const auto data = scenario::generate_timeseries(scm, 50, 100, data_rng);
    Rng fit_rng(derive_seed(3002, s));
    const auto result = causal::train_discovery(data, fit, fit_rng);
    const auto score = causal::score_recovery(result.graph, scm.adjacency);
    acc += score.accuracy;
    auc += score.auroc;
  }
  acc /= seeds;
  auc /= seeds;
  return {acc >= 0.8 && auc >= 0.9, concat("mean accuracy ", num(acc), ", mean AUROC ", num(auc), " over ", seeds,
                                           " seeds")};
}

// ---------------------------------------------------------------- criterion 4

Outcome invariants() {
  Rng rng(4000);
  std::vector<std::string> failed;
  int checks = 0;
  auto expect = [&](bool cond, const std::string& what) {
    ++checks;
    if (!cond && std::find(failed.begin(), failed.end(), what) == failed.end()) failed.push_back(what);
  };

  for (int t = 0; t < 1000; ++t) {
    const Index n = 2 + t % 7;
    const Vec p = random_simplex(n, rng);
    expect(nn::kld(p, random_simplex(n, rng)) >= 0.0, "kl nonnegative");
    expect(std::abs(nn::kld(p, p)) <= 1e-15, "kl of identical distributions");
  }

  const agents::BeliefOptions exact{0.0};
  for (int t = 0; t < 500; ++t) {
    const Index h = 2 + t % 5;
    const agents::Belief b{random_simplex(h, rng), 0};
    Vec l1(h), l2(h);
    for (Index i = 0; i < h; ++i) {
      l1(i) = 0.01 + uniform01(rng);
      l2(i) = 0.01 + uniform01(rng);
    }
    const double scale = std::exp(6.0 * standard_normal(rng));
    const auto once = agents::update_belief(b, l1, exact);
    const auto scaled = agents::update_belief(b, scale * l1, exact);
    const auto seq = agents::update_belief(once, l2, exact);
    const auto joint = agents::update_belief(b, l1.cwiseProduct(l2), exact);
    // Independent Bayes oracle.
    Vec post = b.weights.cwiseProduct(l1);
    post /= post.sum();
    expect(std::abs(once.weights.sum() - 1.0) <= 1e-9, "belief normalization");
    expect((once.weights - post).cwiseAbs().maxCoeff() <= 1e-12, "belief matches Bayes rule");
    expect((once.weights - scaled.weights).cwiseAbs().maxCoeff() <= 1e-12, "belief scale invariance");
    expect((seq.weights - joint.weights).cwiseAbs().maxCoeff() <= 1e-12, "belief sequential composition");
    const auto floored = agents::update_belief(b, l1);
    expect(std::abs(floored.weights.sum() - 1.0) <= 1e-9, "floored belief normalization");

    Mat q = random_mat(3 + t % 6, h, rng);
    const double beta = 0.5 + 10.0 * uniform01(rng);
    const Vec pol = agents::transmitter_policy(q, b.weights, beta);
    const double shift = 50.0 * standard_normal(rng);
    const Vec shifted = agents::transmitter_policy((q.array() + shift).matrix(), b.weights, beta);
    Index a1 = 0, a2 = 0, a3 = 0;
    pol.maxCoeff(&a1);
    shifted.maxCoeff(&a2);
    (q * b.weights).maxCoeff(&a3);
    expect(std::abs(pol.sum() - 1.0) <= 1e-9 && pol.minCoeff() >= 0.0, "policy normalization");
    expect(a1 == a2 && a1 == a3, "policy argmax invariant to Q shift");
  }

  // Noiseless identity pipeline: state index -> bits -> BPSK -> channel without
  // noise -> bits -> index, receiver plays the ideal policy of what it decoded.
  const auto bpsk = phy::Constellation::bpsk();
  for (int t = 0; t < 200; ++t) {
    const int states = 2 + t % 7;
    Mat ideal(states, 4);
    for (int z = 0; z < states; ++z) ideal.row(z) = random_simplex(4, rng).transpose();
    const int z = std::uniform_int_distribution<int>(0, states - 1)(rng);
    phy::Bits bits(3);
    for (int k = 0; k < 3; ++k) bits[k] = static_cast<std::uint8_t>((z >> (2 - k)) & 1);
    phy::ChannelRealization r;
    phy::TransmitOptions opts;
    opts.noiseless = true;
    const auto rx = phy::demodulate(phy::transmit(phy::modulate(bits, bpsk), 0.0, rng, r, opts), r, bpsk);
    int zh = 0;
    for (int k = 0; k < 3; ++k) zh = (zh << 1) | rx[k];
    const Vec wanted = ideal.row(z).transpose();
    const Vec induced = ideal.row(zh).transpose();
    const double c = semantic::semantic_effectiveness({wanted}, {induced});
    expect(c == 0.0, "identity pipeline C = 0");
    expect(semantic::feedback(c).d == 1.0, "identity pipeline d = 1");
  }

  std::string detail = concat(checks, " checks");
  for (const auto& f : failed) detail += concat("; failed: ", f);
  return {failed.empty(), detail};
}

// ------------------------------------------------------------ criteria 5 to 7

exp::ExperimentConfig figure_config() {
  exp::ExperimentConfig cfg;
  apply_environment(cfg);
  cfg.out_dir = work_dir() / "figures";
  cfg.checkpoint_dir = work_dir() / "checkpoints";
  return cfg;
}

std::map<std::string, double> means_at(const std::vector<exp::CellResult>& cells, double snr, bool reliability) {
  std::map<std::string, std::vector<double>> by;
  for (const auto& c : cells)
    if (c.snr_db == snr) by[c.scheme].push_back(reliability ? c.reliability : c.spectral_efficiency);
  std::map<std::string, double> out;
  for (const auto& [k, v] : by) out[k] = exp::summarize(v).mean;
  return out;
}

Outcome fig2_ordering() {
  auto cfg = figure_config();
  cfg.snr_db = {5.0};
  cfg.fig2_schemes = {baselines::Scheme::tom, baselines::Scheme::no_tom, baselines::Scheme::classical};
  const auto r = exp::run_fig2(cfg);
  auto m = means_at(r.cells, 5.0, false);
  std::map<int, std::map<std::string, double>> per_seed;
  for (const auto& c : r.cells) per_seed[c.seed][c.scheme] = c.spectral_efficiency;
  int wins = 0;
  for (auto& [seed, v] : per_seed) wins += v["tom"] >= v["no_tom"];
  const double rate = static_cast<double>(wins) / static_cast<double>(per_seed.size());
  const bool ok = per_seed.size() >= 20 && m["tom"] >= m["no_tom"] && m["no_tom"] >= m["classical"] && rate >= 0.7;
  return {ok, concat("SE at 5 dB: tom ", num(m["tom"]), ", no_tom ", num(m["no_tom"]), ", classical ",
                     num(m["classical"]), "; tom >= no_tom in ", wins, "/", per_seed.size(), " seeds")};
}

Outcome fig3_ordering() {
  auto cfg = figure_config();
  cfg.snr_db = {5.0, 10.0, 15.0, 20.0};
  cfg.fig3_schemes = {baselines::Scheme::tom, baselines::Scheme::no_tom, baselines::Scheme::classical};
  const auto r = exp::run_fig3(cfg);
  std::map<std::string, int> inversions;
  std::string curve;
  double tom20 = 0.0;
  for (double snr : cfg.snr_db) {
    auto m = means_at(r.cells, snr, true);
    for (const char* other : {"no_tom", "classical"}) inversions[other] += m["tom"] < m[other];
    curve += concat(" ", snr, "dB:", num(m["tom"], 3), "/", num(m["no_tom"], 3), "/", num(m["classical"], 3));
    if (snr == 20.0) tom20 = m["tom"];
  }
  const bool ok = inversions["no_tom"] <= 1 && inversions["classical"] <= 1 && tom20 >= 0.9;
  return {ok, concat("reliability tom/no_tom/classical", curve, "; inversions vs no_tom ", inversions["no_tom"],
                     ", vs classical ", inversions["classical"])};
}

Outcome fig4_adaptation() {
  auto cfg = figure_config();
  const auto r = exp::run_fig4(cfg);
  std::map<int, std::map<std::string, int>> rec;
  for (const auto& row : r.rows) rec[row.seed][row.scheme] = row.recovery;
  // A trace that never recovers counts as taking forever.
  auto windows = [](int w) { return w < 0 ? 1 << 30 : w; };
  int fewer = 0, no_more = 0;
  for (auto& [seed, v] : rec) {
    fewer += windows(v["tom"]) < windows(v["no_tom"]);
    no_more += windows(v["tom"]) <= windows(v["no_tom"]);
  }
  const double n = static_cast<double>(rec.size());
  const bool ok = rec.size() >= 20 && fewer >= 0.7 * n;
  return {ok, concat("tom recovers in fewer windows in ", fewer, "/", rec.size(), " seeds (", num(100.0 * fewer / n, 3),
                     "%), in no more windows in ", no_more, "/", rec.size())};
}

// ---------------------------------------------------------------- criterion 8

// p(flips bit errors | z) for two BPSK bits sharing one Rayleigh fade, by
// Simpson's rule after substituting g = t^2 to smooth the sqrt at g = 0.
double pattern_probability(int flips, double snr_db) {
  const double gamma = std::pow(10.0, snr_db / 10.0);
  auto f = [&](double t) {
    const double g = t * t;
    const double p = 0.5 * std::erfc(std::sqrt(g * gamma));
    return 2.0 * t * std::exp(-g) * std::pow(p, flips) * std::pow(1.0 - p, 2 - flips);
  };
  const int n = 20000;
  const double hi = 9.0;
  const double h = hi / n;
  double s = f(0.0) + f(hi);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

Outcome oracle_equivalence() {
  const int states = 3;
  Mat ideal(states, 3);
  for (int z = 0; z < states; ++z) ideal.row(z) = scenario::truncated_discrete_gaussian(3, z, 0.7).transpose();
  bool ok = true;
  std::string detail;
  Rng rng(8000);
  for (double snr : {0.0, 5.0, 10.0}) {
    for (int z = 0; z < states; ++z) {
      // Enumerate every received word: error pattern e over the 2-bit label.
      Vec induced = Vec::Zero(3);
      for (int e = 0; e < 4; ++e) {
        const int flips = (e & 1) + ((e >> 1) & 1);
        const double pe = pattern_probability(flips, snr);
        const int w = z ^ e;
        const Vec act = w < states ? Vec(ideal.row(w).transpose()) : Vec(Vec::Constant(3, 1.0 / 3.0));
        induced += pe * act;
      }
      const Vec target = ideal.row(z).transpose();
      double c = 0.0;
      for (Index a = 0; a < 3; ++a) c += target(a) * std::log(target(a) / induced(a));

      const semantic::ToyPipeline toy(ideal, snr);
      const auto est = toy.effectiveness_monte_carlo(z, 100000, rng);
      const double zscore = (est.value - c) / est.standard_error;
      ok = ok && std::abs(zscore) <= 3.0;
      detail += concat(snr, "dB/z", z, ":", num(c, 4), " z=", num(zscore, 2), " ");
    }
  }
  return {ok, detail};
}

// ---------------------------------------------------------------- criterion 9

std::map<std::string, std::string> snapshot_csvs(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[fs::relative(e.path(), dir).generic_string()] = s.str();
  }
  return out;
}

Outcome determinism() {
  const fs::path dir = work_dir() / "determinism";
  fs::remove_all(dir);
  const auto cfg = exp::parse_config(
      "[experiment]\nseeds = 0,1,2\nsnr_db = 0,10,20\nworkers = 2\nout_dir = " + dir.string() +
      "\n[world]\nstream_length = 2000\n[train]\nrounds = 3\nbatch = 2\nupdates_per_round = 2\npretrain_steps = 30\n"
      "[eval]\nepisodes = 4\nhorizon = 4\nfig3_task_period = 2\n"
      "[fig4]\nsamples = 1200\nswitch_at = 600\nhorizon = 4\n");
  auto run_all = [&] {
    exp::run_fig2(cfg, exp::CheckpointMode::retrain);
    exp::run_fig3(cfg, exp::CheckpointMode::load_only);
    exp::run_fig4(cfg, exp::CheckpointMode::load_only);
    return snapshot_csvs(dir);
  };
  const auto first = run_all();
  const auto second = run_all();
  std::vector<std::string> differing;
  for (const auto& [name, text] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != text) differing.push_back(name);
  }
  const bool ok = !first.empty() && first.size() == second.size() && differing.empty();
  std::string detail = concat(first.size(), " CSV files compared");
  for (const auto& d : differing) detail += concat("; differs: ", d);
  return {ok, detail};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "channel fidelity", 30, channel_fidelity},
      {2, "differentiation correctness", 60, differentiation},
      {3, "causal discovery", 300, discovery},
      {4, "metric invariants", 60, invariants},
      {5, "spectral efficiency ordering", 600, fig2_ordering},
      {6, "reliability ordering", 600, fig3_ordering},
      {7, "task-switch adaptation", 600, fig4_adaptation},
      {8, "brute-force oracle equivalence", 60, oracle_equivalence},
      {9, "determinism", 0, determinism},
  };
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, concat("error: ", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string timing = concat(num(secs, 3), " s");
    if (c.budget_seconds > 0) {
      timing += concat(" of ", c.budget_seconds, " s");
      if (secs > c.budget_seconds) {
        o.pass = false;
        timing += ", over budget";
      }
    }
    failures += !o.pass;
    std::cout << "criterion " << c.id << ": " << (o.pass ? "PASS" : "FAIL") << "  " << c.name << "  [" << timing
              << "]  " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
