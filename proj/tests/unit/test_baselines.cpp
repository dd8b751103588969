#include <doctest.h>

#include "tomsc/baselines/schemes.hpp"
#include "tomsc/baselines/transport.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace tomsc;
using namespace tomsc::baselines;

namespace {

phy::Bits random_bits(std::size_t n, Rng& rng) {
  phy::Bits b(n);
  for (auto& x : b) x = static_cast<std::uint8_t>(uniform01(rng) < 0.5);
  return b;
}

/// Flips every bit with a weak LLR for the first `failures` sends, then
/// delivers clean bits with a strong LLR.
class ScriptedLink : public phy::Link {
 public:
  explicit ScriptedLink(int failures) : failures_(failures) {}
  phy::LinkResult send(const phy::Bits& bits, Rng&) override {
    phy::LinkResult r;
    const bool bad = sends_++ < failures_;
    for (auto b : bits) {
      const std::uint8_t out = bad ? static_cast<std::uint8_t>(1 - b) : b;
      r.bits.push_back(out);
      r.llr.push_back((out == 0 ? 1.0 : -1.0) * (bad ? 1.0 : 10.0));
    }
    r.channel_uses = bits.size();
    uses_ += bits.size();
    r.cqi = 10.0;
    return r;
  }
  double snr_db() const override { return 10.0; }

 private:
  int failures_;
  int sends_ = 0;
};

const agents::World& shared_world() {
  static const agents::World w = agents::build_world(agents::WorldConfig{}, 7);
  return w;
}

}  // namespace

TEST_CASE("repetition coding") {
  Rng rng(1);
  const auto payload = random_bits(64, rng);
  {
    Rng a(2), b(2);
    phy::FadingLink l1(3.0), l2(3.0);
    const auto rep = run_repetition(payload, 1, l1, a);
    const auto plain = l2.send(payload, b);
    CHECK(rep.bits == plain.bits);
    CHECK(rep.channel_uses == payload.size());
  }
  {
    phy::NoiselessLink link;
    const auto rep = run_repetition(payload, 3, link, rng);
    CHECK(rep.bits == payload);
    CHECK(rep.channel_uses == 3 * payload.size());
    CHECK(link.channel_uses() == rep.channel_uses);
  }
  CHECK_THROWS_AS(
      [&] {
        phy::NoiselessLink link;
        run_repetition(payload, 2, link, rng);
      }(),
      Error);
  {
    phy::BinarySymmetricLink link(0.1, 0.0);
    long errors = 0, total = 0;
    while (total < 100000) {
      const auto bits = random_bits(100, rng);
      const auto rep = run_repetition(bits, 3, link, rng);
      for (std::size_t i = 0; i < bits.size(); ++i) errors += bits[i] != rep.bits[i];
      total += 100;
    }
    const double expect = 3 * 0.01 * 0.9 + 0.001;
    CHECK(std::abs(static_cast<double>(errors) / total - expect) < 0.1 * expect);
  }
}

TEST_CASE("harq accounting") {
  Rng rng(3);
  const auto payload = random_bits(32, rng);
  {
    phy::NoiselessLink link;
    const auto r = run_harq(payload, 3, link, rng);
    CHECK(r.delivered);
    CHECK(r.channel_uses == payload.size());
    CHECK(r.retransmissions == 0);
  }
  {
    ScriptedLink link(2);
    const auto r = run_harq(payload, 3, link, rng);
    CHECK(r.delivered);
    CHECK(r.bits == payload);
    CHECK(r.channel_uses == 3 * payload.size());
    CHECK(r.retransmissions == 2);
    CHECK(link.channel_uses() == r.channel_uses);
    REQUIRE(r.errors_per_attempt.size() == 3);
    CHECK(r.errors_per_attempt[0] == payload.size());
    CHECK(r.errors_per_attempt[1] == payload.size());
    CHECK(r.errors_per_attempt[2] == 0);
  }
  {
    ScriptedLink link(5);
    const auto r = run_harq(payload, 2, link, rng);
    CHECK_FALSE(r.delivered);
    CHECK(r.retransmissions == 2);
    CHECK(r.channel_uses == 3 * payload.size());
  }
}

TEST_CASE("chase combining lowers the bit error rate at 5 dB") {
  Rng rng(4);
  phy::FadingLink link(5.0);
  long single = 0, combined = 0, total = 0;
  std::size_t uses = 0;
  while (total < 100000) {
    const auto bits = random_bits(50, rng);
    const auto r = run_harq(bits, 3, link, rng);
    single += static_cast<long>(r.errors_per_attempt.front());
    for (std::size_t i = 0; i < bits.size(); ++i) combined += bits[i] != r.bits[i];
    uses += r.channel_uses;
    total += 50;
  }
  CHECK(combined <= single);
  CHECK(uses == link.channel_uses());
}

TEST_CASE("scheme names") {
  for (Scheme s : {Scheme::tom, Scheme::no_tom, Scheme::classical, Scheme::repetition, Scheme::harq}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_scheme("turbo"), Error);
  BaselineConfig b;
  b.k_repeats = 0;
  CHECK_THROWS_AS(b.validate(), Error);
  b.k_repeats = 3;
  b.max_retx = -1;
  CHECK_THROWS_AS(b.validate(), Error);
}

TEST_CASE("partner schedule is shared and follows the task period") {
  const auto& w = shared_world();
  EvalConfig c;
  c.episodes = 200;
  c.partner_period = 10;
  c.scenario_seed = 9;
  const auto a = partner_schedule(w, c);
  CHECK(a == partner_schedule(w, c));
  REQUIRE(a.size() == 200);
  for (std::size_t e = 0; e < a.size(); ++e) {
    if (e % 10 != 0) CHECK(a[e] == a[e - 1]);
  }
  c.task_period = 50;
  const auto t = partner_schedule(w, c);
  for (std::size_t e = 0; e < t.size(); ++e) {
    const int task = static_cast<int>((e / 50) % static_cast<std::size_t>(w.tasks()));
    const auto members = w.members(task);
    CHECK(std::find(members.begin(), members.end(), t[e]) != members.end());
  }
}

TEST_CASE("without hypotheses to reason about, no-ToM equals ToM") {
  agents::WorldConfig wc;
  wc.hypotheses = 1;
  const auto w = agents::build_world(wc, 11);
  agents::AgentConfig with, without;
  without.tom = false;
  Rng r1(5), r2(5);
  agents::ReceiverAgent rx(w, with, r1);
  agents::TransmitterAgent tx_tom(w, with, r1);
  agents::TransmitterAgent tx_plain(w, without, r2);
  tx_tom.register_library(rx.snapshot_library());
  tx_tom.q_net().layers().back().bias().set_value(Mat::Constant(1, 1, 0.1));
  tx_tom.q_net().layers().front().weights().set_value(Mat::Random(tx_tom.q_net().layers().front().out_dim(),
                                                                  tx_tom.q_net().layers().front().in_dim()));
  tx_plain.restore(tx_tom.checkpoint());
  EvalConfig c;
  c.episodes = 30;
  c.snr_db = 5.0;
  Rng e1(6), e2(6);
  const auto a = run_scheme(Scheme::tom, tx_tom, rx, c, e1);
  const auto b = run_scheme(Scheme::no_tom, tx_plain, rx, c, e2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].c_t == b[i].c_t);
    CHECK(a[i].bits_sent == b[i].bits_sent);
    CHECK(a[i].success == b[i].success);
  }
  CHECK_THROWS_AS(run_scheme(Scheme::no_tom, tx_tom, rx, c, e1), Error);
}

TEST_CASE("classical pipeline accounting and shared csv schema") {
  const auto& w = shared_world();
  Rng rng(7);
  agents::ReceiverAgent rx(w, agents::AgentConfig{}, rng);
  agents::AgentConfig plain;
  plain.tom = false;
  agents::TransmitterAgent tx(w, plain, rng);
  tx.register_library(rx.snapshot_library());
  EvalConfig c;
  c.episodes = 10;
  c.snr_db = 8.0;
  Rng a(8), b(8);
  const auto cls = run_classical(rx, agents::QuantizerConfig{}, c, a);
  const auto sc = run_sc_no_tom(tx, rx, c, b);
  REQUIRE(!cls.empty());
  for (const auto& r : cls) {
    CHECK(r.bits_sent % w.n() == 0);
    const long per_dim = r.bits_sent / w.n();
    CHECK((per_dim == 4 || per_dim == 6 || per_dim == 8));
    CHECK(r.payload_bits == w.k() * per_dim);
    CHECK(r.channel_uses == r.bits_sent);
  }
  for (const auto& r : sc) CHECK(r.bits_sent % w.k() == 0);

  const auto dir = std::filesystem::temp_directory_path();
  semantic::write_metric_csv(cls, dir / "tomsc_cls.csv");
  semantic::write_metric_csv(sc, dir / "tomsc_sc.csv");
  std::ifstream f1(dir / "tomsc_cls.csv"), f2(dir / "tomsc_sc.csv");
  std::string h1, h2;
  std::getline(f1, h1);
  std::getline(f2, h2);
  CHECK(h1 == h2);
  CHECK(h1 == semantic::metric_csv_header());
}

TEST_CASE("repetition and harq transports count every channel use") {
  const auto& w = shared_world();
  Rng rng(9);
  agents::ReceiverAgent rx(w, agents::AgentConfig{}, rng);
  agents::AgentConfig plain;
  plain.tom = false;
  agents::TransmitterAgent tx(w, plain, rng);
  tx.register_library(rx.snapshot_library());
  EvalConfig c;
  c.episodes = 6;
  c.snr_db = 2.0;
  Rng a(10);
  for (const auto& r : run_scheme(Scheme::repetition, tx, rx, c, a)) CHECK(r.channel_uses == 3 * r.bits_sent);
  Rng b(10);
  for (const auto& r : run_scheme(Scheme::harq, tx, rx, c, b)) {
    CHECK(r.channel_uses % r.bits_sent == 0);
    CHECK(r.channel_uses <= 4 * r.bits_sent);
  }
}
