#include <cmath>
#include <limits>
#include <stdexcept>

#include "doctest.h"
#include "rtsim/rng.hpp"
#include "rtsim/scaling.hpp"

using namespace rtsim;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

EnsembleRecord two_time_record(std::size_t n, double t_i, double t_e) {
  EnsembleRecord r;
  r.params.dimension = 1;
  r.params.n_particles = n;
  r.times = {0.0, t_i, t_e};
  r.positions.assign(3, std::vector<double>(n, 0.0));
  return r;
}

}  // namespace

TEST_CASE("characteristic length") {
  const double v0 = 0.02;
  EnsembleRecord r = two_time_record(1, 100.0, 600.0);
  r.positions[1][0] = v0 * 100.0;
  r.positions[2][0] = v0 * 600.0;
  CHECK(characteristic_length(r, 100.0, 600.0) == doctest::Approx(v0 * 500.0).epsilon(1e-14));

  EnsembleRecord pair = two_time_record(2, 1.0, 2.0);
  pair.positions[2] = {0.3, -0.3};
  CHECK(characteristic_length(pair, 1.0, 2.0) == doctest::Approx(0.3));
  CHECK_THROWS_AS(characteristic_length(pair, 1.0, 3.0), std::out_of_range);

  const double D = 0.7, dt = 50.0;
  EnsembleRecord bm = two_time_record(20000, 10.0, 10.0 + dt);
  RngStream rng(17);
  for (std::size_t i = 0; i < 20000; ++i) {
    bm.positions[1][i] = rng.normal();
    bm.positions[2][i] = bm.positions[1][i] + std::sqrt(2.0 * D * dt) * rng.normal();
  }
  CHECK(characteristic_length(bm, 10.0, 10.0 + dt) ==
        doctest::Approx(std::sqrt(2.0 * D * dt)).epsilon(0.03));
}

TEST_CASE("extract_mu_eps") {
  const MuEps a = extract_mu_eps(0.633, 0.863, 500.0, 900.0);
  CHECK(round_sig(1.0 + a.mu, 3) == 1.90);
  CHECK(a.eps1 == doctest::Approx(std::pow(1.0 / 500.0, 1.0 / (1.0 + a.mu))).epsilon(1e-14));
  CHECK(a.eps2 == doctest::Approx(std::pow(1.0 / 900.0, 1.0 / (1.0 + a.mu))).epsilon(1e-14));

  const MuEps b = extract_mu_eps(6.91, 12.1, 500.0, 900.0);
  CHECK(round_sig(1.0 + b.mu, 3) == 1.05);
  CHECK(round_sig(b.eps1, 2) == 2.7e-3);

  const double v0 = 0.02;
  const MuEps c = extract_mu_eps(v0 * 500.0, v0 * 900.0, 500.0, 900.0);
  CHECK(std::abs(c.mu) < 1e-14);

  CHECK_THROWS_AS(extract_mu_eps(1.0, 1.0, 500.0, 900.0), std::invalid_argument);
  CHECK_THROWS_AS(extract_mu_eps(1.0, 2.0, 900.0, 500.0), std::invalid_argument);
  CHECK_THROWS_AS(extract_mu_eps(0.0, 2.0, 500.0, 900.0), std::invalid_argument);
}

TEST_CASE("extract_mu_eps is invariant under power-law rescaling") {
  RngStream rng(3);
  for (int k = 0; k < 200; ++k) {
    const double L1 = 0.1 + rng.uniform(), L2 = L1 * (1.1 + rng.uniform());
    const double t1 = 100.0 + 1000.0 * rng.uniform(), t2 = t1 * (1.2 + rng.uniform());
    const double mu = extract_mu_eps(L1, L2, t1, t2).mu;
    const double c = 0.2 + 5.0 * rng.uniform();
    const double scaled = extract_mu_eps(c * L1, c * L2, std::pow(c, 1.0 + mu) * t1,
                                         std::pow(c, 1.0 + mu) * t2).mu;
    CHECK(scaled == doctest::Approx(mu).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("gamma_of") {
  CHECK(round_sig(gamma_of(3.6e-2, 1.0, 1e-2), 3) == -1.39);
  CHECK(gamma_of(0.3, 1.0, 1.0) == 0.0);
  CHECK(gamma_of(1e-3, 1.0, kInf) == kInf);
  CHECK_THROWS_AS(gamma_of(1.0, 1.0, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(gamma_of(0.1, 1.0, 0.0), std::invalid_argument);
  double prev = -kInf;
  for (double tm : {1e-3, 1e-2, 1.0, 10.0, 1e3, 1e6}) {
    const double g = gamma_of(0.05, 1.0, tm);
    CHECK(g > prev);
    prev = g;
  }
}

TEST_CASE("classify_regime") {
  CHECK(classify_regime(0.05, kInf) == Regime::BallisticTransport);
  CHECK(classify_regime(0.90, -1.39) == Regime::NormalDiffusion);
  CHECK(classify_regime(0.61, 0.60) == Regime::Undetermined);
  CHECK(classify_regime(0.0, 0.55) == Regime::Undetermined);
  CHECK(classify_regime(0.0, 0.56) == Regime::BallisticTransport);
  CHECK(classify_regime(1.0, 0.05) == Regime::NormalDiffusion);
  CHECK(classify_regime(1.0, 0.06) == Regime::Undetermined);
  CHECK(classify_regime(0.3, kInf, {0.05, 0.3}) == Regime::BallisticTransport);
  CHECK(to_string(Regime::BallisticTransport) == "BT");
  CHECK(to_string(Regime::NormalDiffusion) == "ND");
  CHECK(to_string(Regime::Undetermined) == "-");
}

TEST_CASE("scaling report from lengths and from an ensemble") {
  const ScalingWindow w{100.0, 600.0, 1000.0, 1.0};
  const ScalingReport r = scaling_report(6.87, 12.2, w, kInf);
  CHECK(r.regime == Regime::BallisticTransport);
  CHECK(r.gamma1 == kInf);
  CHECK(r.eps1 > r.eps2);

  const double v0 = 0.02;
  EnsembleRecord e;
  e.params.dimension = 1;
  e.params.n_particles = 2;
  e.times = {0.0, 100.0, 600.0, 1000.0};
  for (double t : e.times) e.positions.push_back({v0 * t, -v0 * t});
  const ScalingReport s = scaling_report(e, w, kInf);
  CHECK(s.L1 == doctest::Approx(v0 * 500.0));
  CHECK(s.L2 == doctest::Approx(v0 * 900.0));
  CHECK(std::abs(s.mu) < 1e-12);
  CHECK(s.regime == Regime::BallisticTransport);

  CHECK_THROWS_AS(ScalingWindow({600.0, 100.0, 1000.0, 1.0}).validate(), std::invalid_argument);
  CHECK(w.t_t1() == 500.0);
  CHECK(w.t_t2() == 900.0);
}

TEST_CASE("reference tables are complete") {
  CHECK(reference_table(1).size() == 6);
  CHECK(reference_table(2).size() == 6);
  CHECK(reference_window(1).t_i == 100.0);
  CHECK(reference_window(2).t_e2 == 1e6);
  CHECK_THROWS(reference_table(3));
}

TEST_CASE("round_sig") {
  CHECK(round_sig(0.037740973, 2) == 0.038);
  CHECK(round_sig(-1.4052967, 3) == -1.41);
  CHECK(round_sig(12345.0, 2) == 12000.0);
  CHECK(round_sig(0.0, 2) == 0.0);
  CHECK(std::isinf(round_sig(kInf, 2)));
}
