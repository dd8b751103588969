#include "tomsc/exp/figures.hpp"

#include "tomsc/exp/plot.hpp"
#include "tomsc/exp/pool.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

namespace tomsc::exp {

using baselines::Scheme;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot write ", path.string());
  return out;
}

bool needs_tom(const std::vector<Scheme>& schemes) {
  return std::find(schemes.begin(), schemes.end(), Scheme::tom) != schemes.end();
}

bool needs_no_tom(const std::vector<Scheme>& schemes) {
  return std::any_of(schemes.begin(), schemes.end(), [](Scheme s) { return s != Scheme::tom; });
}

struct SeedPairs {
  std::unique_ptr<agents::World> world;
  std::optional<TrainedPair> tom;
  std::optional<TrainedPair> no_tom;
};

SeedPairs pairs_for(const ExperimentConfig& config, int seed, bool tom, bool no_tom, CheckpointMode mode) {
  SeedPairs p;
  p.world = make_world(config, seed);
  if (tom) p.tom.emplace(obtain_pair(*p.world, config, seed, true, mode));
  if (no_tom) p.no_tom.emplace(obtain_pair(*p.world, config, seed, false, mode));
  return p;
}

RunManifest start_manifest(const std::string& command, const ExperimentConfig& config) {
  RunManifest m;
  m.command = command;
  m.config_ini = config.to_ini();
  m.config_hash = config.hash();
  m.code_version = code_version();
  m.started_at = utc_timestamp();
  return m;
}

/// Runs `work(i)` per seed in parallel and records per-seed status.
template <typename Work>
void run_seeds(const ExperimentConfig& config, RunManifest& manifest, Work&& work) {
  const std::size_t n = config.seeds.size();
  std::vector<ManifestCell> cells(n);
  parallel_for(n, config.worker_count(), [&](std::size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    cells[i].id = concat("seed", config.seeds[i]);
    try {
      work(i);
      cells[i].status = "ok";
    } catch (const std::exception& e) {
      cells[i].status = concat("failed: ", e.what());
    }
    cells[i].seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  });
  manifest.cells = std::move(cells);
}

void finish(RunManifest& manifest, const std::filesystem::path& dir, const std::string& name) {
  manifest.save(dir / (name + "_manifest.json"));
  if (!manifest.all_ok()) {
    std::string why;
    for (const auto& c : manifest.cells) {
      if (c.status != "ok") why += concat("\n  ", c.id, ": ", c.status);
    }
    fail(name, ": some cells failed (see ", (dir / (name + "_manifest.json")).string(), "):", why);
  }
}

SweepResult run_sweep(const ExperimentConfig& config, CheckpointMode mode, const std::string& name,
                      const std::vector<Scheme>& schemes, int task_period, const std::string& metric) {
  config.validate();
  SweepResult result;
  result.manifest = start_manifest(name, config);
  std::vector<std::vector<CellResult>> per_seed(config.seeds.size());
  run_seeds(config, result.manifest, [&](std::size_t i) {
    const int seed = config.seeds[i];
    const auto pairs = pairs_for(config, seed, needs_tom(schemes), needs_no_tom(schemes), mode);
    for (double snr : config.snr_db) {
      for (Scheme s : schemes) {
        const auto records = evaluate_cell(config, seed, s, snr, task_period, pairs.tom ? &*pairs.tom : nullptr,
                                           pairs.no_tom ? &*pairs.no_tom : nullptr);
        CellResult c;
        c.scheme = baselines::to_string(s);
        c.snr_db = snr;
        c.seed = seed;
        c.spectral_efficiency = semantic::spectral_efficiency(records);
        std::vector<double> e;
        double d = 0.0;
        for (const auto& r : records) {
          e.push_back(r.e_t);
          d += r.d_t;
          c.channel_uses += r.channel_uses;
        }
        c.transmissions = static_cast<long>(records.size());
        c.mean_d = records.empty() ? 0.0 : d / static_cast<double>(records.size());
        c.reliability = semantic::semantic_reliability(e, config.eval.reliability).probability;
        per_seed[i].push_back(c);
      }
    }
  });
  for (auto& v : per_seed) result.cells.insert(result.cells.end(), v.begin(), v.end());

  std::filesystem::create_directories(config.out_dir);
  const auto cells_csv = config.out_dir / (name + "_cells.csv");
  {
    auto out = open_csv(cells_csv);
    out << "scheme,snr_db,seed,spectral_efficiency,reliability,mean_d,transmissions,channel_uses\n";
    for (const auto& c : result.cells) {
      out << c.scheme << ',' << fmt(c.snr_db) << ',' << c.seed << ',' << fmt(c.spectral_efficiency) << ','
          << fmt(c.reliability) << ',' << fmt(c.mean_d) << ',' << c.transmissions << ',' << c.channel_uses << '\n';
    }
  }
  const auto agg_csv = config.out_dir / (name + ".csv");
  {
    auto out = open_csv(agg_csv);
    out << "scheme,snr_db," << metric << ",stderr,seeds\n";
    for (Scheme s : schemes) {
      for (double snr : config.snr_db) {
        std::vector<double> v;
        for (const auto& c : result.cells) {
          if (c.scheme == baselines::to_string(s) && c.snr_db == snr) {
            v.push_back(metric == "reliability" ? c.reliability : c.spectral_efficiency);
          }
        }
        if (v.empty()) continue;
        const auto sm = summarize(v);
        out << baselines::to_string(s) << ',' << fmt(snr) << ',' << fmt(sm.mean) << ',' << fmt(sm.stderr_) << ','
            << sm.n << '\n';
      }
    }
  }
  const auto svg = config.out_dir / (name + ".svg");
  if (result.manifest.all_ok()) {
    PlotSpec spec;
    spec.title = metric == "reliability" ? "Semantic reliability vs SNR" : "Spectral efficiency vs SNR";
    spec.x_column = "snr_db";
    spec.y_column = metric;
    spec.series_column = "scheme";
    spec.error_column = "stderr";
    spec.x_label = "SNR (dB)";
    spec.y_label = metric == "reliability" ? "P(E < delta)" : "payload bits per channel use";
    emit_plot(agg_csv, spec, svg);
    result.manifest.add_file(config.out_dir, svg);
  }
  result.manifest.add_file(config.out_dir, cells_csv);
  result.manifest.add_file(config.out_dir, agg_csv);
  finish(result.manifest, config.out_dir, name);
  return result;
}

}  // namespace

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= s.n;
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / (s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

std::vector<semantic::MetricRecord> evaluate_cell(const ExperimentConfig& config, int seed, Scheme scheme,
                                                  double snr_db, int task_period, const TrainedPair* tom,
                                                  const TrainedPair* no_tom) {
  const TrainedPair* pair = scheme == Scheme::tom ? tom : no_tom;
  if (!pair) fail("evaluate: no ", scheme == Scheme::tom ? "ToM" : "no-ToM", " agents for ", baselines::to_string(scheme));
  baselines::EvalConfig ec = config.eval;
  ec.snr_db = snr_db;
  ec.task_period = task_period;
  ec.scenario_seed = derive_seed(static_cast<std::uint64_t>(seed), 51);
  // Same channel stream for every scheme at this (seed, snr).
  Rng rng(derive_seed(derive_seed(static_cast<std::uint64_t>(seed), 50), static_cast<std::uint64_t>(std::llround(snr_db * 1000.0 + 1e6))));
  return baselines::run_scheme(scheme, pair->tx, pair->rx, ec, rng);
}

RunManifest train_all(const ExperimentConfig& config, CheckpointMode mode) {
  config.validate();
  RunManifest m = start_manifest("train", config);
  run_seeds(config, m, [&](std::size_t i) { pairs_for(config, config.seeds[i], true, true, mode); });
  const auto dir = config.checkpoints() / config.training_hash().substr(0, 16);
  if (m.all_ok()) {
    for (int seed : config.seeds) {
      for (const char* scheme : {"tom", "no_tom"}) {
        for (const char* role : {"tx", "rx"}) m.add_file(dir, pair_checkpoint(config, seed, std::string(scheme) == "tom", role));
      }
    }
  }
  std::filesystem::create_directories(dir);
  finish(m, dir, "train");
  return m;
}

SweepResult run_fig2(const ExperimentConfig& config, CheckpointMode mode) {
  return run_sweep(config, mode, "fig2", config.fig2_schemes, config.eval.task_period, "spectral_efficiency");
}

SweepResult run_fig3(const ExperimentConfig& config, CheckpointMode mode) {
  return run_sweep(config, mode, "fig3", config.fig3_schemes, config.fig3_task_period, "reliability");
}

AdaptationResult run_fig4(const ExperimentConfig& config, CheckpointMode mode) {
  config.validate();
  AdaptationResult result;
  result.manifest = start_manifest("fig4", config);
  std::vector<std::vector<AdaptationRow>> per_seed(config.seeds.size());
  run_seeds(config, result.manifest, [&](std::size_t i) {
    const int seed = config.seeds[i];
    const auto pairs = pairs_for(config, seed, true, true, mode);
    train::AdaptationConfig ac = config.adaptation;
    ac.scenario_seed = derive_seed(static_cast<std::uint64_t>(seed), 52);
    for (const TrainedPair* p : {&*pairs.tom, &*pairs.no_tom}) {
      Rng rng(derive_seed(static_cast<std::uint64_t>(seed), 53));
      const auto trace = train::run_adaptation(p->tx, p->rx, ac, rng);
      per_seed[i].push_back({seed, p == &*pairs.tom ? "tom" : "no_tom", trace.window_d, trace.switch_window,
                             train::recovery_windows(trace.window_d, trace.switch_window, std::min(10, trace.switch_window))});
    }
  });
  for (auto& v : per_seed) result.rows.insert(result.rows.end(), v.begin(), v.end());

  const auto& ac = config.adaptation;
  std::filesystem::create_directories(config.out_dir);
  const auto windows_csv = config.out_dir / "fig4_windows.csv";
  {
    auto out = open_csv(windows_csv);
    out << "seed,scheme,window,sample_end,mean_d\n";
    for (const auto& r : result.rows) {
      for (std::size_t w = 0; w < r.window_d.size(); ++w) {
        out << r.seed << ',' << r.scheme << ',' << w << ',' << (w + 1) * static_cast<std::size_t>(ac.window) << ','
            << fmt(r.window_d[w]) << '\n';
      }
    }
  }
  const auto agg_csv = config.out_dir / "fig4.csv";
  {
    auto out = open_csv(agg_csv);
    out << "scheme,window,sample_end,mean_d,stderr,seeds\n";
    for (const std::string scheme : {"tom", "no_tom"}) {
      const std::size_t windows = static_cast<std::size_t>(ac.samples / ac.window);
      for (std::size_t w = 0; w < windows; ++w) {
        std::vector<double> v;
        for (const auto& r : result.rows) {
          if (r.scheme == scheme && w < r.window_d.size()) v.push_back(r.window_d[w]);
        }
        if (v.empty()) continue;
        const auto sm = summarize(v);
        out << scheme << ',' << w << ',' << (w + 1) * static_cast<std::size_t>(ac.window) << ',' << fmt(sm.mean) << ','
            << fmt(sm.stderr_) << ',' << sm.n << '\n';
      }
    }
  }
  const auto recovery_csv = config.out_dir / "fig4_recovery.csv";
  {
    auto out = open_csv(recovery_csv);
    out << "seed,tom_windows,no_tom_windows\n";
    for (std::size_t k = 0; k + 1 < result.rows.size(); k += 2) {
      out << result.rows[k].seed << ',' << result.rows[k].recovery << ',' << result.rows[k + 1].recovery << '\n';
    }
  }
  const auto svg = config.out_dir / "fig4.svg";
  if (result.manifest.all_ok()) {
    PlotSpec spec;
    spec.title = concat("Adaptation after a task switch at sample ", ac.switch_at);
    spec.x_column = "sample_end";
    spec.y_column = "mean_d";
    spec.series_column = "scheme";
    spec.x_label = "samples";
    spec.y_label = "windowed mean feedback d";
    emit_plot(agg_csv, spec, svg);
    result.manifest.add_file(config.out_dir, svg);
  }
  result.manifest.add_file(config.out_dir, windows_csv);
  result.manifest.add_file(config.out_dir, agg_csv);
  result.manifest.add_file(config.out_dir, recovery_csv);
  finish(result.manifest, config.out_dir, "fig4");
  return result;
}

}  // namespace tomsc::exp
