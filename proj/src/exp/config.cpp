#include "tomsc/exp/config.hpp"

#include "tomsc/exp/hash.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <thread>

namespace tomsc::exp {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long parse_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long out = 0;
  try {
    out = std::stol(v, &used);
  } catch (const std::exception&) {
    fail("config: ", key, " expects an integer, got '", v, "'");
  }
  if (used != v.size()) fail("config: ", key, " expects an integer, got '", v, "'");
  return out;
}

int parse_int(const std::string& key, const std::string& v) { return static_cast<int>(parse_long(key, v)); }

double parse_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    fail("config: ", key, " expects a number, got '", v, "'");
  }
  if (used != v.size()) fail("config: ", key, " expects a number, got '", v, "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail("config: ", key, " expects true or false, got '", v, "'");
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <typename T, typename F>
std::string join(const std::vector<T>& xs, F f) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += f(xs[i]);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(parse_double(key, item));
  return out;
}

std::vector<baselines::Scheme> parse_schemes(const std::string& v) {
  std::vector<baselines::Scheme> out;
  for (const auto& item : split(v, ',')) out.push_back(baselines::parse_scheme(item));
  return out;
}

struct Field {
  std::string section;
  std::string key;
  bool training;
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define TOMSC_INT(sec, name, train, member)                                                         \
  Field {                                                                                           \
    sec, name, train, [](ExperimentConfig& c, const std::string& v) { c.member = parse_int(name, v); }, \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }                          \
  }
#define TOMSC_DBL(sec, name, train, member)                                                            \
  Field {                                                                                              \
    sec, name, train, [](ExperimentConfig& c, const std::string& v) { c.member = parse_double(name, v); }, \
        [](const ExperimentConfig& c) { return fmt(c.member); }                                        \
  }
#define TOMSC_BOOL(sec, name, train, member)                                                         \
  Field {                                                                                            \
    sec, name, train, [](ExperimentConfig& c, const std::string& v) { c.member = parse_bool(name, v); }, \
        [](const ExperimentConfig& c) { return std::string(c.member ? "true" : "false"); }           \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"experiment", "seeds", false,
            [](ExperimentConfig& c, const std::string& v) { c.seeds = parse_seed_list(v); },
            [](const ExperimentConfig& c) { return join(c.seeds, [](int s) { return std::to_string(s); }); }},
      Field{"experiment", "snr_db", false,
            [](ExperimentConfig& c, const std::string& v) { c.snr_db = parse_doubles("snr_db", v); },
            [](const ExperimentConfig& c) { return join(c.snr_db, fmt); }},
      Field{"experiment", "fig2_schemes", false,
            [](ExperimentConfig& c, const std::string& v) { c.fig2_schemes = parse_schemes(v); },
            [](const ExperimentConfig& c) {
              return join(c.fig2_schemes, [](baselines::Scheme s) { return baselines::to_string(s); });
            }},
      Field{"experiment", "fig3_schemes", false,
            [](ExperimentConfig& c, const std::string& v) { c.fig3_schemes = parse_schemes(v); },
            [](const ExperimentConfig& c) {
              return join(c.fig3_schemes, [](baselines::Scheme s) { return baselines::to_string(s); });
            }},
      TOMSC_DBL("experiment", "delta", true, delta),
      TOMSC_DBL("experiment", "epsilon", true, epsilon),
      TOMSC_DBL("experiment", "lambda", true, lambda),
      TOMSC_DBL("experiment", "c_len", true, c_len),
      Field{"experiment", "out_dir", false, [](ExperimentConfig& c, const std::string& v) { c.out_dir = v; },
            [](const ExperimentConfig& c) { return c.out_dir.string(); }},
      Field{"experiment", "checkpoint_dir", false,
            [](ExperimentConfig& c, const std::string& v) { c.checkpoint_dir = v; },
            [](const ExperimentConfig& c) { return c.checkpoint_dir.string(); }},
      TOMSC_INT("experiment", "workers", false, workers),

      Field{"world", "variables", true,
            [](ExperimentConfig& c, const std::string& v) { c.world.variables = parse_long("variables", v); },
            [](const ExperimentConfig& c) { return std::to_string(c.world.variables); }},
      TOMSC_DBL("world", "density", true, world.density),
      TOMSC_INT("world", "discovery_samples", true, world.discovery_samples),
      TOMSC_INT("world", "discovery_steps", true, world.discovery_steps),
      TOMSC_INT("world", "alphabet", true, world.alphabet),
      TOMSC_DBL("world", "alpha", true, world.alpha),
      TOMSC_DBL("world", "action_sigma", true, world.action_sigma),
      TOMSC_DBL("world", "value_coupling", true, world.value_coupling),
      Field{"world", "switch_mode", true,
            [](ExperimentConfig& c, const std::string& v) { c.world.switch_mode = scenario::parse_switch_mode(v); },
            [](const ExperimentConfig& c) { return scenario::to_string(c.world.switch_mode); }},
      TOMSC_INT("world", "hypotheses", true, world.hypotheses),
      TOMSC_DBL("world", "dialect_scale", true, world.dialect_scale),
      TOMSC_INT("world", "stream_length", true, world.stream_length),

      TOMSC_INT("agent", "anchors", true, agent.anchors),
      TOMSC_INT("agent", "q_hidden", true, agent.q_hidden),
      TOMSC_INT("agent", "partner_hidden", true, agent.partner_hidden),
      TOMSC_INT("agent", "policy_hidden", true, agent.policy_hidden),
      TOMSC_INT("agent", "tracker_hidden", true, agent.tracker_hidden),
      TOMSC_DBL("agent", "belief_floor", true, agent.belief.floor),
      TOMSC_DBL("agent", "range", true, agent.quantizer.range),

      TOMSC_INT("train", "rounds", true, train.rounds),
      TOMSC_INT("train", "batch", true, train.batch),
      TOMSC_INT("train", "horizon", true, train.horizon),
      TOMSC_INT("train", "updates_per_round", true, train.updates_per_round),
      Field{"train", "optimizer", true,
            [](ExperimentConfig& c, const std::string& v) { c.train.optimizer = nn::parse_optimizer(v); },
            [](const ExperimentConfig& c) { return nn::to_string(c.train.optimizer); }},
      TOMSC_DBL("train", "step_size", true, train.step_size),
      Field{"train", "receiver_step_size", true,
            [](ExperimentConfig& c, const std::string& v) {
              c.train.receiver_step_size = parse_double("receiver_step_size", v);
            },
            [](const ExperimentConfig& c) { return fmt(c.train.receiver_step()); }},
      TOMSC_DBL("train", "eta_q", true, train.eta_q),
      TOMSC_DBL("train", "eta_pi", true, train.eta_pi),
      TOMSC_DBL("train", "eta_f", true, train.eta_f),
      TOMSC_DBL("train", "gamma", true, train.gamma),
      TOMSC_DBL("train", "beta_start", true, train.beta_start),
      TOMSC_DBL("train", "beta_end", true, train.beta_end),
      TOMSC_INT("train", "sync_period", true, train.sync_period),
      TOMSC_INT("train", "capacity", true, train.capacity),
      TOMSC_BOOL("train", "persistent_buffer", true, train.persistent_buffer),
      TOMSC_DBL("train", "clip", true, train.clip),
      Field{"train", "snr_db", true,
            [](ExperimentConfig& c, const std::string& v) { c.train.snr_db = parse_doubles("train.snr_db", v); },
            [](const ExperimentConfig& c) { return join(c.train.snr_db, fmt); }},
      TOMSC_INT("train", "pretrain_steps", true, pretrain_steps),
      TOMSC_DBL("train", "pretrain_lr", true, pretrain_lr),

      TOMSC_INT("eval", "episodes", false, eval.episodes),
      TOMSC_INT("eval", "horizon", false, eval.horizon),
      TOMSC_INT("eval", "partner_period", false, eval.partner_period),
      TOMSC_DBL("eval", "beta", false, eval.beta),
      TOMSC_INT("eval", "k_repeats", false, eval.baseline.k_repeats),
      TOMSC_INT("eval", "max_retx", false, eval.baseline.max_retx),
      TOMSC_INT("eval", "fig3_task_period", false, fig3_task_period),

      TOMSC_INT("fig4", "samples", false, adaptation.samples),
      TOMSC_INT("fig4", "switch_at", false, adaptation.switch_at),
      TOMSC_INT("fig4", "window", false, adaptation.window),
      TOMSC_INT("fig4", "horizon", false, adaptation.horizon),
      TOMSC_DBL("fig4", "snr_db", false, adaptation.snr_db),
      TOMSC_DBL("fig4", "beta", false, adaptation.beta),
      TOMSC_DBL("fig4", "learning_rate", false, adaptation.learning_rate),
      TOMSC_DBL("fig4", "gamma", false, adaptation.gamma),
  };
  return table;
}

#undef TOMSC_INT
#undef TOMSC_DBL
#undef TOMSC_BOOL

std::string render(const ExperimentConfig& c, bool training_only) {
  std::string out;
  std::string section;
  for (const auto& f : fields()) {
    if (training_only && !f.training) continue;
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(c) + "\n";
  }
  return out;
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  for (int s = 0; s < 20; ++s) seeds.push_back(s);
  fig2_schemes = {baselines::Scheme::tom, baselines::Scheme::no_tom, baselines::Scheme::repetition,
                  baselines::Scheme::harq, baselines::Scheme::classical};
  fig3_schemes = {baselines::Scheme::tom, baselines::Scheme::no_tom, baselines::Scheme::classical};
  train.optimizer = nn::OptimizerKind::adam;
  train.step_size = 3e-3;
  train.receiver_step_size = 3e-5;
  train.eta_q = 1.0;
  train.eta_pi = 1.0;
  train.eta_f = 1.0;
  train.rounds = 100;
  train.batch = 8;
  train.updates_per_round = 16;
  train.gamma = 0.5;
  train.persistent_buffer = true;
  resolve();
}

void ExperimentConfig::resolve() {
  semantic::ReliabilityConfig rel;
  rel.delta = delta;
  rel.epsilon = epsilon;
  agent.delta = delta;
  train.p2.reliability = rel;
  train.p2.lambda = lambda;
  train.c_len = c_len;
  eval.reliability = rel;
  eval.c_len = c_len;
  adaptation.reliability = rel;
  adaptation.c_len = c_len;
}

void ExperimentConfig::validate() const {
  world.validate();
  agent.validate();
  train.validate();
  eval.validate();
  adaptation.validate();
  if (pretrain_steps < 0) fail("config: pretrain_steps must be nonnegative");
  if (!(pretrain_lr > 0.0)) fail("config: pretrain_lr must be positive");
  if (fig3_task_period < 1) fail("config: fig3_task_period must be positive");
  if (seeds.empty()) fail("config: no seeds");
  if (snr_db.empty()) fail("config: no SNR points");
  if (fig2_schemes.empty() || fig3_schemes.empty()) fail("config: empty scheme list");
  if (workers < 0) fail("config: workers must be nonnegative");
  if (out_dir.empty()) fail("config: empty out_dir");
  std::vector<int> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) fail("config: duplicate seed");
}

std::filesystem::path ExperimentConfig::checkpoints() const {
  return checkpoint_dir.empty() ? out_dir / "checkpoints" : checkpoint_dir;
}

int ExperimentConfig::worker_count() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::string ExperimentConfig::to_ini() const { return render(*this, false); }
std::string ExperimentConfig::hash() const { return sha256_hex(to_ini()); }
std::string ExperimentConfig::training_hash() const { return sha256_hex(render(*this, true)); }

std::vector<int> parse_seed_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split(text, ',')) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(parse_int("seeds", item));
      continue;
    }
    const int lo = parse_int("seeds", trim(item.substr(0, dash)));
    const int hi = parse_int("seeds", trim(item.substr(dash + 1)));
    if (hi < lo) fail("config: empty seed range '", item, "'");
    for (int s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) fail("config: empty seed list");
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail("config: line ", e.line(), ": ", e.message());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) fail("config: key '", section, "' outside any section");
    const auto& all = fields();
    if (std::none_of(all.begin(), all.end(), [&](const Field& f) { return f.section == section; })) {
      fail("config: unknown section [", section, "]");
    }
    for (const auto& [key, value] : body) {
      const auto& table = fields();
      auto it = std::find_if(table.begin(), table.end(),
                             [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == table.end()) fail("config: unknown key '", key, "' in section [", section, "]");
      it->set(c, trim(value.data()));
    }
  }
  c.resolve();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail("config: cannot read ", path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

void apply_environment(ExperimentConfig& config) {
  if (const char* dir = std::getenv("TOMSC_OUT_DIR"); dir && *dir) config.out_dir = dir;
  if (const char* w = std::getenv("TOMSC_WORKERS"); w && *w) {
    config.workers = parse_int("TOMSC_WORKERS", w);
    if (config.workers < 0) fail("TOMSC_WORKERS must be nonnegative");
  }
}

}  // namespace tomsc::exp
