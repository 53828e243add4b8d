#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "doctest.h"
#include "rtsim/particle_sim.hpp"

using namespace rtsim;

namespace {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

IbmParams small_params(int d) {
  IbmParams p;
  p.dimension = d;
  p.n_particles = 40;
  p.internal.horizon = 2000.0;
  p.internal.drift = {DriftKind::SignStep, 0.01};
  return p;
}

}  // namespace

TEST_CASE("resample_direction d=1") {
  RngStream rng(1);
  int plus = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vec3 v = resample_direction(1, rng);
    REQUIRE(std::abs(v[0]) == 1.0);
    REQUIRE(v[1] == 0.0);
    plus += v[0] > 0 ? 1 : 0;
  }
  CHECK(static_cast<double>(plus) / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("resample_direction d=2 is isotropic") {
  RngStream rng(2);
  double xx = 0, yy = 0, xy = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vec3 v = resample_direction(2, rng);
    REQUIRE(std::abs(norm(v) - 1.0) < 1e-12);
    xx += v[0] * v[0];
    yy += v[1] * v[1];
    xy += v[0] * v[1];
  }
  CHECK(std::abs(xx / n - 0.5) < 0.01);
  CHECK(std::abs(yy / n - 0.5) < 0.01);
  CHECK(std::abs(xy / n) < 0.01);
}

TEST_CASE("resample_direction d=3 is uniform on the sphere") {
  RngStream rng(3);
  Vec3 mean{}, sq{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Vec3 v = resample_direction(3, rng);
    REQUIRE(std::abs(norm(v) - 1.0) < 1e-12);
    for (int c = 0; c < 3; ++c) {
      mean[c] += v[c];
      sq[c] += v[c] * v[c];
    }
  }
  for (int c = 0; c < 3; ++c) {
    CHECK(std::abs(mean[c] / n) < 0.01);
    CHECK(std::abs(sq[c] / n - 1.0 / 3.0) < 0.01);
  }
  CHECK_THROWS_AS(resample_direction(4, rng), std::invalid_argument);
}

TEST_CASE("step_ibm pure transport") {
  IbmParams p;
  p.internal.sigma = 0.0;
  p.internal.drift = {DriftKind::SignStep, 0.0};
  ParticleState s;
  s.v = {1.0, 0.0, 0.0};
  s.m = -1.0;
  s.clock = {0.0, 1e300};
  RngStream rng(4);
  const StepResult one = step_ibm(s, p, rng);
  CHECK(one.state.x[0] == 0.02);
  CHECK_FALSE(one.fired);
  ParticleState t = s;
  for (int k = 0; k < 1000; ++k) t = step_ibm(t, p, rng).state;
  CHECK(t.x[0] == doctest::Approx(1000 * 0.02).epsilon(1e-12));
  CHECK(t.m == -1.0);
}

TEST_CASE("step_ibm firing step") {
  IbmParams p;
  p.dimension = 3;
  ParticleState s;
  s.v = {0.0, 0.0, 1.0};
  s.x = {1.0, 2.0, 3.0};
  s.m = 5.0;
  s.clock = {0.0, 1e-9};
  RngStream rng(5);
  const StepResult r = step_ibm(s, p, rng);
  REQUIRE(r.fired);
  CHECK(r.state.x[0] == 1.0);
  CHECK(r.state.x[1] == 2.0);
  CHECK(r.state.x[2] == 3.0 + p.speed * p.internal.dt);
  CHECK(r.state.m == 0.0);
  CHECK(r.state.clock.accumulated == 0.0);
  CHECK(r.state.clock.threshold > 0.0);
  CHECK(std::abs(norm(r.state.v) - 1.0) < 1e-12);
  CHECK(r.state.v != s.v);
}

TEST_CASE("log_spaced_times") {
  const auto t = log_spaced_times(1.0, 1e4, 4);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 1e4);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
  const std::vector<double> extra{600.0, 555.0};
  const auto u = log_spaced_times(1.0, 1e4, 4, extra);
  CHECK(std::find(u.begin(), u.end(), 600.0) != u.end());
  CHECK(std::find(u.begin(), u.end(), 555.0) != u.end());
  const std::vector<double> bad{2e4};
  CHECK_THROWS_AS(log_spaced_times(1.0, 1e4, 4, bad), std::invalid_argument);
}

TEST_CASE("IbmParams validation") {
  IbmParams p;
  p.speed = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = IbmParams{};
  p.dimension = 0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = IbmParams{};
  p.observation_times = {10.0, 5.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.observation_times = {10.0, 2e6};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("run_ensemble records every particle at every time") {
  IbmParams p = small_params(2);
  const EnsembleRecord r = run_ensemble(p);
  CHECK(r.times.front() == 0.0);
  CHECK(r.times.back() == p.internal.horizon);
  for (const auto& snap : r.positions) CHECK(snap.size() == p.n_particles * 2);
  CHECK(r.seeds.size() == p.n_particles);
  CHECK(r.time_index(r.times[3]) == 3);
  CHECK_THROWS_AS(r.time_index(0.5), std::out_of_range);
}

TEST_CASE("speed invariant between single-step snapshots") {
  IbmParams p = small_params(3);
  p.internal.horizon = 300.0;
  p.store_full_state = true;
  for (int k = 1; k <= 300; ++k) p.observation_times.push_back(k);
  const EnsembleRecord r = run_ensemble(p);
  const double step = p.speed * p.internal.dt;
  for (std::size_t j = 0; j + 1 < r.times.size(); ++j) {
    for (std::size_t i = 0; i < r.n_particles(); ++i) {
      const auto a = r.position(j, i), b = r.position(j + 1, i);
      double len2 = 0.0;
      for (int c = 0; c < 3; ++c) {
        const double dx = b[c] - a[c];
        len2 += dx * dx;
        REQUIRE(dx == doctest::Approx(step * r.directions[j][i * 3 + c]).scale(1.0).epsilon(1e-12));
      }
      REQUIRE(std::sqrt(len2) == doctest::Approx(step).epsilon(1e-10));
    }
  }
}

TEST_CASE("run lengths and run times") {
  for (auto conv : {RunTimeConvention::DirectionChange, RunTimeConvention::Firing}) {
    IbmParams p = small_params(1);
    p.convention = conv;
    const EnsembleRecord r = run_ensemble(p);
    REQUIRE(r.run_lengths.size() == r.run_times.samples.size());
    REQUIRE(r.run_particles.size() == r.run_times.samples.size());
    for (std::size_t k = 0; k < r.run_lengths.size(); ++k) {
      CHECK(r.run_lengths[k] == p.speed * r.run_times.samples[k]);
    }
    const double covered = std::accumulate(r.run_times.samples.begin(), r.run_times.samples.end(), 0.0) +
                           std::accumulate(r.run_times.censored.begin(), r.run_times.censored.end(), 0.0);
    CHECK(covered == doctest::Approx(p.n_particles * p.internal.horizon).epsilon(1e-9));
  }
  IbmParams p = small_params(1);
  const auto changes = run_ensemble(p).run_times.samples.size();
  p.convention = RunTimeConvention::Firing;
  CHECK(run_ensemble(p).run_times.samples.size() > changes);
}

TEST_CASE("run_ensemble is reproducible across worker counts") {
  IbmParams p = small_params(2);
  p.store_full_state = true;
  ParallelOptions many;
  many.workers = 8;
  const EnsembleRecord a = run_ensemble(p);
  const EnsembleRecord b = run_ensemble(p, many);
  CHECK(a.positions == b.positions);
  CHECK(a.directions == b.directions);
  CHECK(a.internal_states == b.internal_states);
  CHECK(a.run_times.samples == b.run_times.samples);
  CHECK(a.seeds == b.seeds);
  p.master_seed = 2;
  CHECK(run_ensemble(p).positions != a.positions);
}
