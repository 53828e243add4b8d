#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "rtsim/parallel.hpp"
#include "rtsim/rng.hpp"
#include "rtsim/sde.hpp"
#include "rtsim/stats.hpp"

using namespace rtsim;

TEST_CASE("drift_eval examples") {
  CHECK(drift_eval({DriftKind::OrnsteinUhlenbeck, 0.5}, 1.0) == -0.5);
  CHECK(drift_eval({DriftKind::SignStep, 1.0}, 0.0) == -1.0);
  CHECK(drift_eval({DriftKind::SignStep, 0.0}, -7.3) == 0.0);
  CHECK(sign0(0.0) == 1.0);
  CHECK(sign0(-0.0) == 1.0);
  CHECK(sign0(-1e-300) == -1.0);
}

TEST_CASE("DriftSpec validation and infinite adaptation time") {
  CHECK_THROWS_AS(DriftSpec({DriftKind::SignStep, -1.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(DriftSpec({DriftKind::SignStep, INFINITY}).validate(), std::invalid_argument);
  const DriftSpec inf = DriftSpec::from_adaptation_time(DriftKind::SignStep, INFINITY);
  CHECK(inf.inverse_time == 0.0);
  CHECK(DriftSpec::from_adaptation_time(DriftKind::OrnsteinUhlenbeck, 4.0).inverse_time == 0.25);
}

TEST_CASE("em_step examples") {
  CHECK(em_step({DriftKind::OrnsteinUhlenbeck, 0.5}, 3.0, 1.0, 0.5, 0.0) == 0.75);
  const double expected = -1.0 + std::sqrt(2.0) * 0.3;
  CHECK(em_step({DriftKind::SignStep, 1.0}, std::sqrt(2.0), 0.0, 1.0, 0.3) ==
        doctest::Approx(expected).epsilon(1e-15));
  CHECK(expected == doctest::Approx(-0.575736).epsilon(1e-6));
  for (double dt : {1e-3, 1.0, 1e6}) {
    CHECK(em_step({DriftKind::OrnsteinUhlenbeck, 0.0}, 0.0, 2.5, dt, 0.0) == 2.5);
    CHECK(em_step({DriftKind::SignStep, 0.0}, 0.0, -4.0, dt, 0.0) == -4.0);
  }
}

TEST_CASE("em_step is affine in the noise increment") {
  RngStream rng(11);
  for (int i = 0; i < 1000; ++i) {
    const DriftSpec spec{i % 2 ? DriftKind::SignStep : DriftKind::OrnsteinUhlenbeck, rng.uniform()};
    const double sigma = 2.0 * rng.uniform();
    const double m = 4.0 * rng.normal();
    const double dt = 0.01 + rng.uniform();
    const double a = rng.normal(), b = rng.normal();
    const double diff = em_step(spec, sigma, m, dt, a + b) - em_step(spec, sigma, m, dt, a);
    CHECK(diff == doctest::Approx(sigma * b).epsilon(1e-12).scale(std::abs(m) + 1.0));
  }
}

TEST_CASE("sign-step drift points toward zero") {
  RngStream rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double m = 10.0 * rng.normal();
    if (m == 0.0) continue;
    CHECK(drift_eval({DriftKind::SignStep, 0.1 + rng.uniform()}, m) * m < 0.0);
  }
}

TEST_CASE("rate_eval kinds") {
  CHECK(rate_eval({RateKind::StepIndicator}, 0.0).value == 1.0);
  CHECK(rate_eval({RateKind::StepIndicator}, 3.0).value == 1.0);
  CHECK(rate_eval({RateKind::StepIndicator}, -1e-12).value == 0.0);
  CHECK(rate_eval({RateKind::Unit}, -5.0).value == 1.0);
  for (double y : {-1e3, -5.0, 0.0, 5.0, 50.0}) {
    CHECK(rate_eval({RateKind::ExpCcwToCw}, y).value > 0.0);
    CHECK(rate_eval({RateKind::ExpCwToCcw}, y).value > 0.0);
  }
  const RateValue huge = rate_eval({RateKind::ExpCcwToCw}, 1e6);
  CHECK(huge.clamped);
  CHECK(std::isfinite(huge.value));
}

TEST_CASE("clock_advance examples") {
  const ClockAdvance a = clock_advance({0.3, 1.0}, 1.0, 1.0);
  CHECK(a.clock.accumulated == doctest::Approx(1.3));
  CHECK(a.fired);
  const ClockAdvance b = clock_advance({0.3, 1.0}, 0.0, 1e6);
  CHECK(b.clock.accumulated == 0.3);
  CHECK_FALSE(b.fired);
  CHECK_THROWS_AS(clock_advance({0.0, 1.0}, -1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(clock_advance({0.0, 1.0}, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("clock_advance is additive") {
  const ClockState c{0.1, 100.0};
  const ClockAdvance two = clock_advance(clock_advance(c, 0.7, 0.25).clock, 0.7, 1.5);
  const ClockAdvance one = clock_advance(c, 0.7, 1.75);
  CHECK(two.clock.accumulated == doctest::Approx(one.clock.accumulated).epsilon(1e-15));
  CHECK(two.fired == one.fired);
}

TEST_CASE("clock_reset thresholds") {
  CHECK(clock_from_uniform(std::exp(-1.0)).threshold == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(clock_from_uniform(1.0).threshold > 0.0);
  CHECK(clock_from_uniform(0.5).accumulated == 0.0);
  CHECK_THROWS_AS(clock_from_uniform(0.0), std::invalid_argument);

  RngStream rng(2024);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const ClockState c = clock_reset(rng);
    REQUIRE(c.threshold > 0.0);
    sum += c.threshold;
  }
  CHECK(sum / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("unit-rate firing times are Exp(1)") {
  // Continuous-time limit of the clock: dt small against the mean.
  RngStream rng(7);
  const double dt = 1e-3;
  std::vector<double> times;
  for (int i = 0; i < 10000; ++i) {
    ClockState c = clock_reset(rng);
    std::uint64_t k = 0;
    bool fired = false;
    while (!fired) {
      const ClockAdvance a = clock_advance(c, 1.0, dt);
      c = a.clock;
      fired = a.fired;
      ++k;
    }
    times.push_back(static_cast<double>(k) * dt);
  }
  const double d = ks_statistic(times, [](double t) { return -std::expm1(-t); }, dt);
  CHECK(d < ks_critical_1pct(times.size()));
}

TEST_CASE("rng streams") {
  RngStream a(1), b(1);
  for (int i = 0; i < 100; ++i) CHECK(a.bits() == b.bits());
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0) != stream_seed(2, 0));
  RngStream r(3);
  double s1 = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform_pos();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("parallel_for covers every index once and rethrows") {
  for (unsigned w : {1u, 3u, 8u}) {
    std::vector<int> hits(1000, 0);
    std::atomic<std::size_t> last{0};
    ParallelOptions opt;
    opt.workers = w;
    opt.progress_every = 100;
    opt.progress = [&](std::size_t done, std::size_t) { last = std::max<std::size_t>(last, done); };
    parallel_for(hits.size(), opt, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
    CHECK(last == 1000);
  }
  ParallelOptions opt;
  opt.workers = 4;
  CHECK_THROWS_AS(parallel_for(100, opt,
                               [](std::size_t i) {
                                 if (i == 37) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
}
