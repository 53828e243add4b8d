#pragma once

// Extraction of the scaling exponents (eps, mu, gamma) from characteristic
// lengths and classification of the dispersion regime.

#include <string_view>
#include <vector>

#include "rtsim/particle_sim.hpp"

namespace rtsim {

struct ScalingWindow {
  double t_i = 100.0;
  double t_e1 = 600.0;
  double t_e2 = 1000.0;
  double t_lambda = 1.0;

  void validate() const;
  double t_t1() const { return t_e1 - t_i; }
  double t_t2() const { return t_e2 - t_i; }
};

/// Root-mean-square displacement between observation times t_i and t_e.
double characteristic_length(const EnsembleRecord& record, double t_i, double t_e);

struct MuEps {
  double mu = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
};

/// 1 + mu = ln(Tt2/Tt1) / ln(L2/L1), eps_j = (T_lambda / Tt_j)^(1/(1+mu)).
MuEps extract_mu_eps(double L1, double L2, double t_t1, double t_t2, double t_lambda = 1.0);

/// gamma = ln(T_lambda / T_m) / ln(eps); +inf for T_m = +inf.
double gamma_of(double eps, double t_lambda, double t_m);

enum class Regime { BallisticTransport, NormalDiffusion, Undetermined };

/// "BT", "ND" or "-".
std::string_view to_string(Regime regime);

struct RegimeTolerances {
  double gamma = 0.05;
  double mu = 0.2;
};

Regime classify_regime(double mu, double gamma, const RegimeTolerances& tol = {});

struct ScalingReport {
  double t_m = 0.0;
  ScalingWindow window;
  double L1 = 0.0;
  double L2 = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
  double mu = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  /// Classified from mu and both gammas (both must satisfy the rule).
  Regime regime = Regime::Undetermined;
};

ScalingReport scaling_report(double L1, double L2, const ScalingWindow& window, double t_m,
                             const RegimeTolerances& tol = {});
ScalingReport scaling_report(const EnsembleRecord& record, const ScalingWindow& window,
                             double t_m, const RegimeTolerances& tol = {});

/// A published table row: inputs (t_m, L1, L2) and the printed outputs.
struct ReferenceRow {
  double t_m;
  double L1, L2;
  double eps1, eps2;
  double one_plus_mu;
  double gamma1, gamma2;
  std::string_view regime;  ///< "BT", "ND" or "-"
};

/// Reference rows for table 1 (window 100..1000) or 2 (window 1e5..1e6).
const std::vector<ReferenceRow>& reference_table(int table);
ScalingWindow reference_window(int table);

/// x rounded to `digits` significant figures.
double round_sig(double x, int digits);

}  // namespace rtsim
