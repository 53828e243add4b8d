#pragma once

// Exact reference values for the kinetic limit: eigenvalue roots of the
// m-equations, Fourier-Laplace transfer functions, the ballistic and
// diffusive limits, the 1-D self-similar profile and its moments.

#include <complex>
#include <functional>
#include <stdexcept>
#include <variant>

namespace rtsim {

using cplx = std::complex<double>;

struct SpectralInputs {
  double eps = 1e-2;
  double gamma = 1.0;
  double mu = 0.0;
  double s = 1.0;
  /// |xi|; for d = 1 this is xi itself.
  double xi = 1.0;
  int dimension = 1;

  /// Throws std::invalid_argument unless eps in (0, 1), s > 0, mu in [0, 1]
  /// and dimension in {1, 2, 3}.
  void validate() const;
};

class BranchSelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EigenRoots {
  cplx lambda;  ///< Re < 0 root of l^2 + eps^g l - (eps^(1+mu) s + i eps xv + 1)
  cplx nu;      ///< Re > 0 root of n^2 - eps^g n - (eps^(1+mu) s + i eps xv)
  /// Residuals relative to the largest term of each quadratic.
  double residual_lambda = 0.0;
  double residual_nu = 0.0;
};

/// Roots for one velocity direction with xv = xi . v. Throws
/// BranchSelectionError if the sign conditions do not single out one root.
EigenRoots eigen_roots(const SpectralInputs& in, double xv);

/// Leading-order nu for gamma > 1/2, mu = 0.
double nu_asymptotic(const SpectralInputs& in, double xv);

struct QuadratureOptions {
  int circle_nodes = 256;  ///< trapezoid nodes for d = 2
};

struct TransferValue {
  cplx value;
  /// Difference between two quadrature resolutions; 0 for d = 1.
  double quadrature_error = 0.0;
};

/// Normalized average over the unit sphere of f(|xi| e.v); f receives e.v * |xi|.
struct VelocityAverage {
  cplx value;
  double error = 0.0;
};
VelocityAverage velocity_average(int dimension, double xi, const std::function<cplx(double)>& f,
                                 const QuadratureOptions& q = {});

/// rho_eps / rho_in for any mu, evaluated through a cancellation-free
/// rearrangement that is exactly 1/s at xi = 0.
TransferValue transfer(const SpectralInputs& in, const QuadratureOptions& q = {});
/// Same quantity evaluated term by term as printed (for cross-checks).
TransferValue transfer_literal(const SpectralInputs& in, const QuadratureOptions& q = {});
/// transfer() restricted to mu = 0.
TransferValue transfer_ballistic(const SpectralInputs& in, const QuadratureOptions& q = {});
/// transfer() restricted to mu = 1.
TransferValue transfer_diffusive(const SpectralInputs& in, const QuadratureOptions& q = {});

/// Closed 1-D form (1 + r) / ((1 + r)^2 - eta^2), r = sqrt(1 - eta^2).
cplx limit_H_1d(cplx eta);
/// H(eta) for |e.v|-weighted spheres, by quadrature for d >= 2.
VelocityAverage limit_H(int dimension, cplx eta, const QuadratureOptions& q = {});
/// Ballistic limit 2 s^-1 H(i xi / s).
cplx ballistic_limit(double s, double xi, int dimension = 1);
/// Diffusive limit 1 / (s + C xi^2).
double diffusive_limit(double s, double xi, double diffusion_constant);

/// Kernel F(y) = 1 / (2 pi sqrt(1 - y^2)) on |y| < 1, +inf at |y| = 1, 0 outside.
double profile_F(double y);
/// Density 2 F(x / t) / t for delta initial data.
double ballistic_profile_1d(double x, double t);
/// -(1 / (pi y)) Im H(-1 / (y + i delta)) with principal branches.
double sokhotsky_profile(double y, double delta);
/// Integral of y^k 2F(y) over (-1, 1) via y = sin(theta).
double profile_moment(int k);

struct PointMass {
  double at = 0.0;
};
struct Density {
  std::function<double(double)> fn;
  double lo = 0.0;
  double hi = 0.0;
};
using InitialDensity = std::variant<PointMass, Density>;

/// t^2 coefficient of MSD(t) for the 1-D ballistic limit started from rho_in.
/// Throws std::invalid_argument if rho_in does not integrate to 1 (1e-6).
double limit_msd_ballistic(const InitialDensity& rho_in);
/// MSD(t) = integral of x^2 rho(x, t) for the same limit, by nested quadrature.
double limit_msd_ballistic_at(const InitialDensity& rho_in, double t);

enum class GammaRegime { GammaZero, GammaNegative };

double diffusion_constant(GammaRegime regime, int dimension);

/// Second moment 2 d C t of the heat kernel.
double heat_kernel_msd(double C, int dimension, double t);

}  // namespace rtsim
