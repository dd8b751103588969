#include <doctest.h>

#include "tomsc/scenario/oracle.hpp"
#include "tomsc/scenario/scm.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace tomsc;
using namespace tomsc::scenario;

TEST_CASE("scm generation rejects degenerate requests") {
  CHECK_THROWS_AS(generate_scm(5, 0.0, 1), Error);
  CHECK_THROWS_AS(generate_scm(1, 0.5, 1), Error);
  CHECK_THROWS_AS(generate_scm(5, 1.5, 1), Error);
}

TEST_CASE("generated graphs are acyclic, stationary and nonempty") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    auto scm = generate_scm(2 + static_cast<Index>(seed % 6), 0.2 + 0.1 * (seed % 8), seed);
    REQUIRE(is_acyclic(scm.adjacency));
    CHECK(scm.edge_count() > 0);
    CHECK(scm.spectral_radius() < 1.0);
    for (Index i = 0; i < scm.n; ++i) {
      for (Index j = 0; j < scm.n; ++j) {
        if (!scm.adjacency(i, j)) {
          CHECK(scm.weights(i, j) == 0.0);
          continue;
        }
        const double w = std::abs(scm.weights(i, j));
        CHECK(w >= 0.3);
        CHECK(w <= 0.9);
      }
    }
  }
}

TEST_CASE("cycle detection oracle") {
  Adjacency a = Adjacency::Constant(3, 3, false);
  a(0, 1) = a(1, 2) = true;
  CHECK(is_acyclic(a));
  a(2, 0) = true;
  CHECK_FALSE(is_acyclic(a));
  Adjacency s = Adjacency::Constant(2, 2, false);
  s(1, 1) = true;
  CHECK_FALSE(is_acyclic(s));
}

TEST_CASE("same seed gives identical scm and data") {
  auto a = generate_scm(5, 0.4, 42);
  auto b = generate_scm(5, 0.4, 42);
  CHECK(a.adjacency == b.adjacency);
  CHECK((a.weights.array() == b.weights.array()).all());
  Rng ra(9), rb(9);
  auto da = generate_timeseries(a, 3, 20, ra);
  auto db = generate_timeseries(b, 3, 20, rb);
  for (int s = 0; s < 3; ++s) CHECK((da.samples[s].array() == db.samples[s].array()).all());
}

TEST_CASE("zero weights give white noise") {
  GroundTruthScm scm = generate_scm(3, 1.0, 5);
  scm.weights.setZero();
  scm.self_weights.setZero();
  scm.noise_sigma = 1.0;
  Rng rng(1);
  auto d = generate_timeseries(scm, 1, 20000, rng);
  const Mat& x = d.samples[0];
  for (Index i = 0; i < 3; ++i) {
    const double var = x.col(i).squaredNorm() / x.rows();
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
    const double lag = x.col(i).head(x.rows() - 1).dot(x.col(i).tail(x.rows() - 1)) / x.rows();
    CHECK(std::abs(lag) < 0.03);
  }
}

TEST_CASE("strong edge shows lag-1 cross correlation") {
  GroundTruthScm scm = generate_scm(2, 1.0, 11);
  scm.adjacency.setConstant(false);
  scm.weights.setZero();
  scm.adjacency(0, 1) = true;
  scm.weights(0, 1) = 0.9;
  scm.self_weights.setZero();
  Rng rng(2);
  auto d = generate_timeseries(scm, 1, 1000, rng);
  const Mat& x = d.samples[0];
  Vec a = x.col(0).head(999), b = x.col(1).tail(999);
  a.array() -= a.mean();
  b.array() -= b.mean();
  CHECK(a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm()) > 0.5);
}

TEST_CASE("long series keep bounded variance") {
  auto scm = generate_scm(5, 0.6, 3);
  Rng rng(4);
  auto d = generate_timeseries(scm, 1, 10000, rng);
  const Mat& x = d.samples[0];
  // stationary covariance from the discrete Lyapunov equation
  const Mat m = scm.transition();
  Mat cov = Mat::Identity(5, 5) * scm.noise_sigma * scm.noise_sigma;
  Mat term = cov;
  for (int k = 0; k < 500; ++k) {
    term = m * term * m.transpose();
    cov += term;
  }
  for (Index i = 0; i < 5; ++i) {
    const Vec c = x.col(i).array() - x.col(i).mean();
    const double var = c.squaredNorm() / x.rows();
    CHECK(var < 2.0 * cov(i, i));
    CHECK(var > 0.5 * cov(i, i));
  }
}

TEST_CASE("divergent dynamics raise") {
  auto scm = generate_scm(2, 1.0, 7);
  scm.self_weights.setConstant(1.5);
  Rng rng(1);
  CHECK_THROWS_AS(generate_timeseries(scm, 1, 5000, rng), Error);
}

TEST_CASE("dataset and scm serialization round trip") {
  auto scm = generate_scm(4, 0.5, 8);
  Rng rng(3);
  auto d = generate_timeseries(scm, 2, 6, rng);
  auto dir = std::filesystem::temp_directory_path() / "tomsc_scenario_test";
  write_dataset_csv(d, dir / "data.csv");
  auto back = read_dataset_csv(dir / "data.csv");
  REQUIRE(back.samples.size() == 2);
  for (int s = 0; s < 2; ++s) CHECK((back.samples[s].array() == d.samples[s].array()).all());
  auto scm2 = scm_from_json(scm_to_json(scm));
  CHECK(scm2.adjacency == scm.adjacency);
  CHECK((scm2.weights.array() == scm.weights.array()).all());
  std::ofstream(dir / "bad.csv") << "sample,t,series,value\n0,0,x,1\n";
  CHECK_THROWS_AS(read_dataset_csv(dir / "bad.csv"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("action oracle examples") {
  ActionOracle o(5, 1.7, 0.7);
  Vec p = o.component(0, 0.0);
  Index mode;
  p.maxCoeff(&mode);
  CHECK(mode == 0);
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const int parents = static_cast<int>(rng() % 6);
    Vec q = o.component(parents, 0.0);
    CHECK(std::abs(q.sum() - 1.0) < 1e-9);
  }
  for (double alpha : {0.5, 1.0, 1.5}) {
    ActionOracle a(5, alpha, 0.7);
    for (int parents = 0; parents <= 6; ++parents) {
      Index m;
      Vec dist = a.component(parents, 0.0);
      dist.maxCoeff(&m);
      const double mu = alpha * parents;
      if (mu < 4.0 && mu - std::floor(mu) == 0.5) {
        const auto lo = static_cast<Index>(std::floor(mu));
        CHECK(dist[lo] == doctest::Approx(dist[lo + 1]));
        continue;
      }
      const long expect = std::clamp<long>(std::lround(alpha * parents), 0, 4);
      CHECK(m == expect);
    }
  }
  ActionOracle coupled(5, 1.0, 0.7, 1.0);
  CHECK(coupled.mean(1, 1.5) == doctest::Approx(2.5));
  CHECK_THROWS_AS(ActionOracle(1, 1.0, 0.7), Error);
}

TEST_CASE("task switching") {
  ActionOracle o(5, 1.0, 0.7);
  auto flipped = switch_task(o, SwitchMode::permute_labels);
  CHECK(flipped.task_id == 1);
  auto back = switch_task(flipped, SwitchMode::permute_labels);
  CHECK(back.task_id == 2);
  for (int parents = 0; parents < 4; ++parents) {
    CHECK((back.component(parents, 0.0) - o.component(parents, 0.0)).cwiseAbs().maxCoeff() < 1e-15);
  }
  auto up = switch_task(o, SwitchMode::scale_up);
  auto down = switch_task(up, SwitchMode::scale_down);
  CHECK(down.alpha == o.alpha);
  // toy scenario: one variable with 1 parent, one with 2
  double tv = 0.0;
  for (int parents : {1, 2}) tv = std::max(tv, total_variation(o.component(parents, 0.0), up.component(parents, 0.0)));
  CHECK(tv > 0.1);
  CHECK(total_variation(o.component(1, 0.0), flipped.component(1, 0.0)) > 0.1);
  CHECK_THROWS_AS(parse_switch_mode("shuffle"), Error);
}
