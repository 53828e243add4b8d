#include "rtsim/scaling.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rtsim {

void ScalingWindow::validate() const {
  if (!(t_i < t_e1 && t_e1 < t_e2)) {
    throw std::invalid_argument("scaling window needs t_i < t_e1 < t_e2");
  }
  if (!(t_lambda > 0.0)) {
    throw std::invalid_argument("t_lambda must be > 0");
  }
}

double characteristic_length(const EnsembleRecord& record, double t_i, double t_e) {
  const std::size_t a = record.time_index(t_i);
  const std::size_t b = record.time_index(t_e);
  const std::size_t n = record.n_particles();
  const auto d = static_cast<std::size_t>(record.dimension());
  double sum = 0.0;
  for (std::size_t k = 0; k < n * d; ++k) {
    const double dx = record.positions[b][k] - record.positions[a][k];
    sum += dx * dx;
  }
  return std::sqrt(sum / static_cast<double>(n));
}

MuEps extract_mu_eps(double L1, double L2, double t_t1, double t_t2, double t_lambda) {
  if (!(L1 > 0.0 && L2 > 0.0) || L1 == L2) {
    throw std::invalid_argument("extract_mu_eps needs distinct positive lengths");
  }
  if (!(t_t1 > 0.0 && t_t2 > t_t1)) {
    throw std::invalid_argument("extract_mu_eps needs 0 < Tt1 < Tt2");
  }
  const double one_plus_mu = std::log(t_t2 / t_t1) / std::log(L2 / L1);
  MuEps out;
  out.mu = one_plus_mu - 1.0;
  out.eps1 = std::pow(t_lambda / t_t1, 1.0 / one_plus_mu);
  out.eps2 = std::pow(t_lambda / t_t2, 1.0 / one_plus_mu);
  return out;
}

double gamma_of(double eps, double t_lambda, double t_m) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("gamma_of needs eps in (0, 1)");
  }
  if (!(t_m > 0.0)) {
    throw std::invalid_argument("gamma_of needs T_m > 0");
  }
  if (std::isinf(t_m)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::log(t_lambda / t_m) / std::log(eps) + 0.0;
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::BallisticTransport:
      return "BT";
    case Regime::NormalDiffusion:
      return "ND";
    case Regime::Undetermined:
      return "-";
  }
  return "-";
}

Regime classify_regime(double mu, double gamma, const RegimeTolerances& tol) {
  if (gamma > 0.5 + tol.gamma && std::abs(mu) <= tol.mu) {
    return Regime::BallisticTransport;
  }
  if (gamma <= tol.gamma && std::abs(mu - 1.0) <= tol.mu) {
    return Regime::NormalDiffusion;
  }
  return Regime::Undetermined;
}

ScalingReport scaling_report(double L1, double L2, const ScalingWindow& window, double t_m,
                             const RegimeTolerances& tol) {
  window.validate();
  const MuEps me = extract_mu_eps(L1, L2, window.t_t1(), window.t_t2(), window.t_lambda);
  ScalingReport r;
  r.t_m = t_m;
  r.window = window;
  r.L1 = L1;
  r.L2 = L2;
  r.eps1 = me.eps1;
  r.eps2 = me.eps2;
  r.mu = me.mu;
  r.gamma1 = gamma_of(me.eps1, window.t_lambda, t_m);
  r.gamma2 = gamma_of(me.eps2, window.t_lambda, t_m);
  const Regime a = classify_regime(r.mu, r.gamma1, tol);
  const Regime b = classify_regime(r.mu, r.gamma2, tol);
  r.regime = a == b ? a : Regime::Undetermined;
  return r;
}

ScalingReport scaling_report(const EnsembleRecord& record, const ScalingWindow& window,
                             double t_m, const RegimeTolerances& tol) {
  window.validate();
  return scaling_report(characteristic_length(record, window.t_i, window.t_e1),
                        characteristic_length(record, window.t_i, window.t_e2), window, t_m, tol);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<ReferenceRow> kTable1 = {
    {1e-2, 6.33e-1, 8.63e-1, 3.60e-2, 2.77e-2, 1.90, -1.39, -1.29, "ND"},
    {1.0, 7.18e-1, 9.73e-1, 4.06e-2, 3.00e-2, 1.94, 0.0, 0.0, "ND"},
    {10.0, 4.03, 5.81, 2.11e-2, 1.47e-2, 1.61, 0.60, 0.55, "-"},
    {1e2, 6.71, 1.16e1, 3.10e-3, 1.79e-3, 1.08, 0.80, 0.73, "BT"},
    {1e3, 6.91, 1.21e1, 2.70e-3, 1.55e-3, 1.05, 1.17, 1.07, "BT"},
    {kInf, 6.87, 1.22e1, 2.40e-3, 1.34e-3, 1.03, kInf, kInf, "BT"},
};

const std::vector<ReferenceRow> kTable2 = {
    {1e-2, 2.12e1, 2.79e1, 2.10e-3, 1.59e-3, 2.13, -0.75, -0.71, "ND"},
    {1.0, 2.3330e1, 3.08e1, 2.00e-3, 1.51e-3, 2.11, 0.0, 0.0, "ND"},
    {10.0, 1.57e2, 2.06e2, 2.40e-3, 1.83e-3, 2.17, 0.38, 0.37, "ND"},
    {1e2, 1.62e3, 2.18e3, 1.30e-3, 1.00e-3, 1.99, 0.70, 0.67, "-"},
    {1e3, 6.08e3, 1.01e4, 1.10e-5, 6.57e-6, 1.15, 0.60, 0.58, "BT"},
    {kInf, 7.07e3, 1.24e4, 3.80e-6, 2.17e-6, 1.05, kInf, kInf, "BT"},
};

}  // namespace

const std::vector<ReferenceRow>& reference_table(int table) {
  if (table == 1) return kTable1;
  if (table == 2) return kTable2;
  throw std::invalid_argument("reference table must be 1 or 2");
}

ScalingWindow reference_window(int table) {
  if (table == 1) return {1e2, 6e2, 1e3, 1.0};
  if (table == 2) return {1e5, 6e5, 1e6, 1.0};
  throw std::invalid_argument("reference table must be 1 or 2");
}

double round_sig(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) {
    return x;
  }
  const double mag = std::floor(std::log10(std::abs(x)));
  const double scale = std::pow(10.0, digits - 1 - mag);
  return std::round(x * scale) / scale;
}

}  // namespace rtsim
