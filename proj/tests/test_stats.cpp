#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "rtsim/rng.hpp"
#include "rtsim/stats.hpp"

using namespace rtsim;

namespace {

EnsembleRecord make_record(int d, std::vector<double> times, std::size_t n) {
  EnsembleRecord r;
  r.params.dimension = d;
  r.params.n_particles = n;
  r.times = std::move(times);
  r.positions.assign(r.times.size(), std::vector<double>(n * static_cast<std::size_t>(d), 0.0));
  return r;
}

DurationSamples durations(std::vector<double> v) {
  DurationSamples d;
  d.samples = std::move(v);
  return d;
}

std::vector<double> exp_samples(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = -std::log(rng.uniform_pos());
  return v;
}

}  // namespace

TEST_CASE("msd of pure transport") {
  const double v0 = 0.02;
  EnsembleRecord r = make_record(1, {0, 1, 10, 100}, 1);
  for (std::size_t j = 0; j < r.times.size(); ++j) r.positions[j][0] = 3.0 + v0 * r.times[j];
  const MsdCurve m = msd(r);
  CHECK(m.values[0] == 0.0);
  for (std::size_t j = 0; j < r.times.size(); ++j) {
    CHECK(m.values[j] == doctest::Approx(v0 * v0 * r.times[j] * r.times[j]).epsilon(1e-12));
  }
}

TEST_CASE("msd of symmetric pair") {
  EnsembleRecord r = make_record(2, {0, 5}, 2);
  r.positions[1] = {0.7, 0.0, -0.7, 0.0};
  CHECK(msd(r).values[1] == doctest::Approx(0.49));
  EnsembleRecord empty = make_record(1, {}, 1);
  CHECK_THROWS_AS(msd(empty), std::invalid_argument);
}

TEST_CASE("msd of a simple random walk") {
  const std::size_t n = 10000, steps = 1000;
  std::vector<double> times;
  for (std::size_t k = 0; k <= steps; k += 100) times.push_back(static_cast<double>(k));
  EnsembleRecord r = make_record(1, times, n);
  RngStream rng(99);
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
      x += rng.uniform() < 0.5 ? 1.0 : -1.0;
      if (k % 100 == 0) r.positions[k / 100][i] = x;
    }
  }
  const MsdCurve m = msd(r);
  for (std::size_t j = 1; j < m.times.size(); ++j) {
    CHECK(m.values[j] == doctest::Approx(m.times[j]).epsilon(0.05));
  }
}

TEST_CASE("survival_cdf counting") {
  const DurationSamples d = durations({1, 2, 3});
  const std::vector<double> grid{0.5, 1.5, 2.0, 3.5};
  const SurvivalCurve c = survival_cdf(d, grid);
  CHECK(c.p[0] == 1.0);
  CHECK(c.p[1] == doctest::Approx(2.0 / 3.0));
  CHECK(c.p[2] == doctest::Approx(1.0 / 3.0));
  CHECK(c.p[3] == 0.0);
  CHECK_THROWS_AS(survival_cdf(durations({}), grid), std::invalid_argument);
}

TEST_CASE("survival_cdf of exponential samples") {
  const DurationSamples d = durations(exp_samples(10000, 4));
  const std::vector<double> grid{1.0};
  CHECK(survival_cdf(d, grid).p[0] == doctest::Approx(std::exp(-1.0)).epsilon(0.02 / std::exp(-1.0)));
  const SurvivalCurve c = survival_cdf(d);
  CHECK(c.t.size() == 64);
  for (std::size_t k = 1; k < c.p.size(); ++k) {
    CHECK(c.p[k] <= c.p[k - 1]);
    CHECK(c.p[k] >= 0.0);
  }
  CHECK(c.p.front() <= 1.0);
}

TEST_CASE("Kaplan-Meier correction") {
  DurationSamples d = durations({1, 2, 3});
  d.censored = {1.5};
  const std::vector<double> grid{0.5, 1.2, 2.5, 4.0};
  const SurvivalCurve c = survival_cdf(d, grid, SurvivalOptions{true});
  CHECK(c.p[0] == 1.0);
  CHECK(c.p[1] == doctest::Approx(0.75));
  CHECK(c.p[2] == doctest::Approx(0.75 * 0.5));
  CHECK(c.p[3] == 0.0);
  // Without censoring it reduces to the plain estimator.
  const DurationSamples e = durations(exp_samples(500, 6));
  const auto g = log_grid(0.01, 5.0, 50);
  const SurvivalCurve km = survival_cdf(e, g, SurvivalOptions{true}), plain = survival_cdf(e, g);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(km.p[k] == doctest::Approx(plain.p[k]).epsilon(1e-12));
}

TEST_CASE("grids") {
  const auto g = log_grid(1.0, 1000.0, 4);
  CHECK(g[1] == doctest::Approx(10.0));
  CHECK(g.back() == 1000.0);
  const auto l = linear_grid(0.0, 1.0, 5);
  CHECK(l[2] == 0.5);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(linear_grid(1.0, 1.0, 4), std::invalid_argument);
}

TEST_CASE("fit_loglog exact power laws") {
  const auto t = log_grid(0.3, 3000.0, 37);
  std::vector<double> sq, c;
  for (double x : t) {
    sq.push_back(x * x);
    c.push_back(4.2);
  }
  const FitResult f = fit_loglog(t, sq, {1.0, 1000.0});
  CHECK(std::abs(f.slope - 2.0) < 1e-10);
  CHECK(f.n_points >= 3);
  CHECK(f.lo == 1.0);
  CHECK(f.hi == 1000.0);
  CHECK(std::abs(fit_loglog(t, c, {1.0, 1000.0}).slope) < 1e-12);
}

TEST_CASE("fit_loglog noisy power law") {
  RngStream rng(8);
  const auto t = log_grid(1.0, 1e4, 200);
  std::vector<double> y;
  for (double x : t) y.push_back(std::pow(x, -0.659) * (1.0 + 0.01 * rng.normal()));
  CHECK(fit_loglog(t, y, {30.0, 1e3}).slope == doctest::Approx(-0.659).epsilon(0.01 / 0.659));
}

TEST_CASE("fit errors") {
  const std::vector<double> t{1, 2, 3, 4}, y{1, 0, 1, 1};
  CHECK_THROWS_AS(fit_loglog(t, y, {1.0, 4.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_loglog(t, t, {1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(fit_semilog(t, y, {0.5, 4.0}), std::invalid_argument);
}

TEST_CASE("fit_loglog is scale equivariant and ignores points outside the window") {
  RngStream rng(9);
  const auto t = log_grid(1.0, 1e3, 60);
  std::vector<double> y, scaled, perturbed;
  for (double x : t) {
    y.push_back(std::pow(x, 1.3) * std::exp(0.1 * rng.normal()));
    scaled.push_back(7.5 * y.back());
    perturbed.push_back(x < 10.0 || x > 100.0 ? 1e6 * y.back() : y.back());
  }
  const FitWindow w{10.0, 100.0};
  const FitResult a = fit_loglog(t, y, w), b = fit_loglog(t, scaled, w), c = fit_loglog(t, perturbed, w);
  CHECK(b.slope == doctest::Approx(a.slope).epsilon(1e-12));
  CHECK(b.intercept - a.intercept == doctest::Approx(std::log(7.5)).epsilon(1e-12));
  CHECK(c.slope == a.slope);
  CHECK(c.intercept == a.intercept);
  CHECK(c.residual_rms == a.residual_rms);
}

TEST_CASE("fit_semilog") {
  const double tau = 3.7;
  const auto t = linear_grid(0.0, 20.0, 41);
  std::vector<double> y, c;
  for (double x : t) {
    y.push_back(std::exp(-x / tau));
    c.push_back(0.3);
  }
  CHECK(std::abs(-fit_semilog(t, y, {0.0, 20.0}).slope - 1.0 / tau) < 1e-10);
  CHECK(std::abs(fit_semilog(t, c, {0.0, 20.0}).slope) < 1e-12);

  const DurationSamples d = durations(exp_samples(10000, 10));
  const auto g = linear_grid(0.5, 3.0, 60);
  const SurvivalCurve s = survival_cdf(d, g);
  CHECK(-fit_semilog(s, {0.5, 3.0}).slope == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("rescaled pdf of a ballistic ensemble collapses exactly") {
  const double v0 = 0.02;
  EnsembleRecord r = make_record(1, {0, 10, 20, 40, 80}, 100);
  for (std::size_t j = 0; j < r.times.size(); ++j) {
    for (std::size_t i = 0; i < 100; ++i) r.positions[j][i] = (i % 2 ? v0 : -v0) * r.times[j];
  }
  const std::vector<double> lags{10, 30, 70};
  const auto pdfs = rescaled_displacement_pdf(r, 10.0, lags, 1.0, 10);
  for (const RescaledPdf& p : pdfs) {
    CHECK(p.density == pdfs.front().density);
    const double w = p.edges[1] - p.edges[0];
    CHECK(p.density.front() * w == doctest::Approx(0.5));
    CHECK(p.density.back() * w == doctest::Approx(0.5));
  }
  CHECK(pdfs.front().edges.front() == doctest::Approx(-v0));
  CHECK(pdfs.front().edges.back() == doctest::Approx(v0));
  CHECK_THROWS_AS(rescaled_displacement_pdf(r, 10.0, std::vector<double>{15.0}, 1.0),
                  std::out_of_range);
  CHECK_THROWS_AS(rescaled_displacement_pdf(r, 10.0, lags, 1.5), std::invalid_argument);
}

TEST_CASE("rescaled pdf of Brownian increments collapses with beta one half") {
  const std::size_t n = 20000;
  EnsembleRecord r = make_record(2, {0, 10, 40, 160}, n);
  RngStream rng(13);
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < 2; ++c) {
      double x = 0.0, t = 0.0;
      for (std::size_t j = 1; j < r.times.size(); ++j) {
        x += std::sqrt(r.times[j] - t) * rng.normal();
        t = r.times[j];
        r.positions[j][i * 2 + static_cast<std::size_t>(c)] = x;
      }
    }
  }
  const std::vector<double> lags{10, 40, 160};
  const auto pdfs = rescaled_displacement_pdf(r, 0.0, lags, 0.5, 30);
  for (const RescaledPdf& p : pdfs) {
    double total = 0.0;
    for (std::size_t b = 0; b < p.density.size(); ++b) total += p.density[b] * (p.edges[b + 1] - p.edges[b]);
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
  // Two-sample chi-square between lags; 30 bins, so 29 dof, 1% critical value 49.6.
  for (std::size_t k = 1; k < pdfs.size(); ++k) {
    double chi2 = 0.0;
    for (std::size_t b = 0; b < pdfs[0].density.size(); ++b) {
      const double w = pdfs[0].edges[b + 1] - pdfs[0].edges[b];
      const double a = pdfs[0].density[b] * w * n, c = pdfs[k].density[b] * w * n;
      if (a + c > 0) chi2 += (a - c) * (a - c) / (a + c);
    }
    CHECK(chi2 < 49.6);
  }
  CHECK(rice_bins(n) == 55);
}

TEST_CASE("collapse exponent") {
  CHECK(collapse_exponent(1.5415) == doctest::Approx(1.0 / 1.4585).epsilon(1e-14));
  CHECK(collapse_exponent(2.0) == 1.0);
  CHECK(collapse_exponent(1.0) == 0.5);
}

TEST_CASE("ks statistic") {
  const auto v = exp_samples(10000, 21);
  const auto cdf = [](double t) { return -std::expm1(-t); };
  CHECK(ks_statistic(v, cdf) < ks_critical_1pct(v.size()));
  std::vector<double> shifted = v;
  for (double& x : shifted) x *= 1.1;
  CHECK(ks_statistic(shifted, cdf) > ks_critical_1pct(v.size()));
  CHECK(ks_critical_1pct(10000) == doctest::Approx(0.0163));
}
