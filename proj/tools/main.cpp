#include "tomsc/exp/figures.hpp"
#include "tomsc/exp/plot.hpp"
#include "tomsc/exp/selftest.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

using namespace tomsc;

namespace {

struct Common {
  std::string config;
  std::string seeds;
  std::string out_dir;
  std::string checkpoint;
  int workers = -1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI configuration file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seeds, "seed list, e.g. 3 or 0-19 or 1,4,7");
  app->add_option("--out-dir", c.out_dir, "output directory");
  app->add_option("--checkpoint", c.checkpoint, "checkpoint directory");
  app->add_option("--workers", c.workers, "worker threads (0 = all cores)");
}

exp::ExperimentConfig build_config(const Common& c) {
  exp::ExperimentConfig cfg = c.config.empty() ? exp::ExperimentConfig{} : exp::load_config(c.config);
  exp::apply_environment(cfg);
  if (!c.seeds.empty()) cfg.seeds = exp::parse_seed_list(c.seeds);
  if (!c.out_dir.empty()) cfg.out_dir = c.out_dir;
  if (!c.checkpoint.empty()) cfg.checkpoint_dir = c.checkpoint;
  if (c.workers >= 0) cfg.workers = c.workers;
  cfg.resolve();
  cfg.validate();
  return cfg;
}

exp::CheckpointMode mode_of(bool load_only, bool retrain) {
  if (load_only && retrain) throw CLI::ValidationError("--load-only and --retrain are exclusive");
  if (load_only) return exp::CheckpointMode::load_only;
  return retrain ? exp::CheckpointMode::retrain : exp::CheckpointMode::train_or_load;
}

void print_sweep(const exp::SweepResult& r, const std::string& metric) {
  std::map<std::pair<std::string, double>, std::vector<double>> by;
  std::vector<std::pair<std::string, double>> order;
  for (const auto& c : r.cells) {
    auto key = std::make_pair(c.scheme, c.snr_db);
    if (!by.count(key)) order.push_back(key);
    by[key].push_back(metric == "reliability" ? c.reliability : c.spectral_efficiency);
  }
  for (const auto& k : order) {
    const auto s = exp::summarize(by[k]);
    std::cout << std::left << std::setw(12) << k.first << std::right << std::setw(6) << std::defaultfloat << k.second << " dB  " << metric
              << ' ' << std::fixed << std::setprecision(4) << s.mean << " +/- " << s.stderr_ << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Theory-of-mind semantic communication experiments"};
  app.require_subcommand(1);
  Common common;
  bool load_only = false, retrain = false;

  auto* train = app.add_subcommand("train", "train (or refresh) agent pairs for every seed");
  add_common(train, common);
  train->add_flag("--retrain", retrain, "ignore cached checkpoints");

  auto* eval = app.add_subcommand("eval", "evaluate one scheme on one seed and write per-transmission records");
  add_common(eval, common);
  std::string scheme = "tom";
  double snr = 10.0;
  int task_period = 0;
  std::string records;
  eval->add_option("--scheme", scheme, "tom, no_tom, classical, repetition or harq");
  eval->add_option("--snr", snr, "SNR in dB");
  eval->add_option("--task-period", task_period, "alternate tasks every this many episodes (0 = off)");
  eval->add_option("--records", records, "CSV path for the metric records");
  eval->add_flag("--load-only", load_only, "fail instead of training when a checkpoint is missing");

  std::vector<CLI::App*> figs;
  for (const char* name : {"fig2", "fig3", "fig4"}) {
    auto* f = app.add_subcommand(name, std::string("run the ") + name + " sweep");
    add_common(f, common);
    f->add_flag("--load-only", load_only, "fail instead of training when a checkpoint is missing");
    f->add_flag("--retrain", retrain, "ignore cached checkpoints");
    figs.push_back(f);
  }

  auto* selftest = app.add_subcommand("selftest", "run the invariant suite");

  auto* show = app.add_subcommand("show-config", "print the resolved configuration");
  add_common(show, common);

  auto* plot = app.add_subcommand("plot", "render a CSV as an SVG line chart");
  std::string csv, svg, xcol, ycol, series, err, title;
  plot->add_option("csv", csv)->required()->check(CLI::ExistingFile);
  plot->add_option("svg", svg)->required();
  plot->add_option("--x", xcol)->required();
  plot->add_option("--y", ycol)->required();
  plot->add_option("--series", series);
  plot->add_option("--error", err);
  plot->add_option("--title", title);

  auto* verify = app.add_subcommand("verify", "recheck the files listed in a run manifest");
  std::string manifest;
  verify->add_option("manifest", manifest)->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*selftest) return exp::run_selftest(std::cout) ? 0 : 1;
    if (*plot) {
      exp::PlotSpec spec{title, xcol, ycol, series, err, xcol, ycol};
      exp::emit_plot(csv, spec, svg);
      return 0;
    }
    if (*verify) {
      const auto m = exp::RunManifest::load(manifest);
      const auto problems = m.verify(std::filesystem::path(manifest).parent_path());
      for (const auto& p : problems) std::cout << p << '\n';
      std::cout << m.files.size() << " files, " << problems.size() << " problems\n";
      return problems.empty() ? 0 : 1;
    }
    const auto cfg = build_config(common);
    if (*show) {
      std::cout << cfg.to_ini();
      return 0;
    }
    if (*train) {
      const auto m = exp::train_all(cfg, mode_of(false, retrain));
      std::cout << "trained " << m.cells.size() << " seeds into "
                << (cfg.checkpoints() / cfg.training_hash().substr(0, 16)).string() << '\n';
      return 0;
    }
    if (*eval) {
      if (cfg.seeds.size() != 1) throw Error("eval: pass exactly one seed with --seed");
      const int seed = cfg.seeds.front();
      const auto s = baselines::parse_scheme(scheme);
      const auto world = exp::make_world(cfg, seed);
      const auto mode = mode_of(load_only, false);
      std::optional<exp::TrainedPair> tom, no_tom;
      if (s == baselines::Scheme::tom) {
        tom.emplace(exp::obtain_pair(*world, cfg, seed, true, mode));
      } else {
        no_tom.emplace(exp::obtain_pair(*world, cfg, seed, false, mode));
      }
      const auto rec = exp::evaluate_cell(cfg, seed, s, snr, task_period, tom ? &*tom : nullptr,
                                          no_tom ? &*no_tom : nullptr);
      std::vector<double> e;
      for (const auto& r : rec) e.push_back(r.e_t);
      std::cout << scheme << " seed " << seed << " at " << snr << " dB: spectral efficiency "
                << semantic::spectral_efficiency(rec) << ", reliability "
                << semantic::semantic_reliability(e, cfg.eval.reliability).probability << ", " << rec.size()
                << " transmissions\n";
      if (!records.empty()) semantic::write_metric_csv(rec, records);
      return 0;
    }
    const auto mode = mode_of(load_only, retrain);
    if (*figs[0]) {
      print_sweep(exp::run_fig2(cfg, mode), "spectral_efficiency");
    } else if (*figs[1]) {
      print_sweep(exp::run_fig3(cfg, mode), "reliability");
    } else if (*figs[2]) {
      const auto r = exp::run_fig4(cfg, mode);
      int fewer = 0, no_more = 0, pairs = 0;
      for (std::size_t k = 0; k + 1 < r.rows.size(); k += 2) {
        const int a = r.rows[k].recovery < 0 ? 1 << 20 : r.rows[k].recovery;
        const int b = r.rows[k + 1].recovery < 0 ? 1 << 20 : r.rows[k + 1].recovery;
        fewer += a < b;
        no_more += a <= b;
        ++pairs;
      }
      std::cout << "ToM recovered in fewer windows in " << fewer << '/' << pairs << " seeds, no more windows in "
                << no_more << '/' << pairs << '\n';
    }
    std::cout << "outputs in " << cfg.out_dir.string() << '\n';
    return 0;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
