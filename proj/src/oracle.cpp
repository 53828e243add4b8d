#include "rtsim/oracle.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace rtsim {

void SpectralInputs::validate() const {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw std::invalid_argument("eps must lie in (0, 1)");
  }
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::invalid_argument("s must be finite and > 0");
  }
  if (!(mu >= 0.0 && mu <= 1.0)) {
    throw std::invalid_argument("mu must lie in [0, 1]");
  }
  if (!std::isfinite(gamma) || !std::isfinite(xi)) {
    throw std::invalid_argument("gamma and xi must be finite");
  }
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
}

namespace {

constexpr cplx I{0.0, 1.0};

double rel_residual(cplx value, double a, double b, double c) {
  return std::abs(value) / std::max({a, b, c, std::numeric_limits<double>::min()});
}

cplx pick(cplx r1, cplx r2, bool negative, const char* which) {
  const bool ok1 = negative ? r1.real() < 0.0 : r1.real() > 0.0;
  const bool ok2 = negative ? r2.real() < 0.0 : r2.real() > 0.0;
  if (ok1 == ok2) {
    throw BranchSelectionError(std::string("no unique root with the required sign for ") +
                               which + ": " + std::to_string(r1.real()) + ", " +
                               std::to_string(r2.real()));
  }
  return ok1 ? r1 : r2;
}

}  // namespace

EigenRoots eigen_roots(const SpectralInputs& in, double xv) {
  const double p = std::pow(in.eps, in.gamma);
  const cplx c = std::pow(in.eps, 1.0 + in.mu) * in.s + I * (in.eps * xv);
  EigenRoots out;

  // l^2 + p l - (c + 1) = 0: larger root first, the other from the product.
  {
    const cplx q = c + 1.0;
    const cplx r = std::sqrt(p * p + 4.0 * q);
    const cplx big = -(p + r) / 2.0;
    const cplx small = -q / big;
    out.lambda = pick(big, small, true, "lambda");
    const cplx l = out.lambda;
    out.residual_lambda =
        rel_residual(l * l + p * l - q, std::norm(l), p * std::abs(l), std::abs(q));
  }
  // n^2 - p n - c = 0.
  {
    const cplx r = std::sqrt(p * p + 4.0 * c);
    const cplx big = (p + r) / 2.0;
    const cplx small = -c / big;
    out.nu = pick(big, small, false, "nu");
    const cplx n = out.nu;
    out.residual_nu = rel_residual(n * n - p * n - c, std::norm(n), p * std::abs(n), std::abs(c));
  }
  return out;
}

double nu_asymptotic(const SpectralInputs& in, double xv) {
  const double s = in.s;
  return std::sqrt(in.eps) * (std::numbers::sqrt2 / 2.0) *
             std::sqrt(s + std::sqrt(s * s + xv * xv)) +
         std::pow(in.eps, in.gamma) / 2.0;
}

namespace {

template <unsigned N>
cplx gauss_half_average(double xi, const std::function<cplx(double)>& f) {
  using rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  cplx sum = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] == 0.0) {
      sum += w[k] * f(0.0);
    } else {
      sum += w[k] * (f(xi * x[k]) + f(-xi * x[k]));
    }
  }
  return sum / 2.0;
}

cplx trapezoid_circle(double xi, const std::function<cplx(double)>& f, int n) {
  cplx sum = 0.0;
  for (int k = 0; k < n; ++k) {
    sum += f(xi * std::cos(2.0 * std::numbers::pi * k / n));
  }
  return sum / static_cast<double>(n);
}

}  // namespace

VelocityAverage velocity_average(int dimension, double xi, const std::function<cplx(double)>& f,
                                 const QuadratureOptions& q) {
  switch (dimension) {
    case 1:
      return {(f(xi) + f(-xi)) / 2.0, 0.0};
    case 2: {
      const int n = std::max(8, q.circle_nodes - q.circle_nodes % 2);
      const cplx fine = trapezoid_circle(xi, f, n);
      const cplx coarse = trapezoid_circle(xi, f, n / 2);
      return {fine, std::abs(fine - coarse)};
    }
    case 3: {
      // Integrand depends on v through e.v = u only; u is uniform on [-1, 1].
      const cplx fine = gauss_half_average<40>(xi, f);
      const cplx coarse = gauss_half_average<20>(xi, f);
      return {fine, std::abs(fine - coarse)};
    }
    default:
      throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
}

TransferValue transfer(const SpectralInputs& in, const QuadratureOptions& q) {
  in.validate();
  const double scale = std::pow(in.eps, -in.mu);
  // With c = eps^(1+mu) (s + i eps^-mu xv) the denominator term
  // 1 - 1/(-l(n - l - 2 eps^g)) equals (n - l) c / (n D), D = 1 + (n - l) c / n.
  VelocityAverage num = velocity_average(
      in.dimension, in.xi,
      [&](double xv) {
        const EigenRoots r = eigen_roots(in, xv);
        const cplx c = std::pow(in.eps, 1.0 + in.mu) * in.s + I * (in.eps * xv);
        const cplx D = 1.0 + (r.nu - r.lambda) * c / r.nu;
        return (r.nu - r.lambda) / (r.nu * D);
      },
      q);
  VelocityAverage den = velocity_average(
      in.dimension, in.xi,
      [&](double xv) {
        const EigenRoots r = eigen_roots(in, xv);
        const cplx c = std::pow(in.eps, 1.0 + in.mu) * in.s + I * (in.eps * xv);
        const cplx reduced = in.s + I * (scale * xv);
        const cplx D = 1.0 + (r.nu - r.lambda) * c / r.nu;
        return (r.nu - r.lambda) * reduced / (r.nu * D);
      },
      q);
  const cplx value = num.value / den.value;
  const double err = std::abs(value) * (num.error / std::abs(num.value) +
                                        den.error / std::abs(den.value));
  return {value, err};
}

TransferValue transfer_literal(const SpectralInputs& in, const QuadratureOptions& q) {
  in.validate();
  const double p = std::pow(in.eps, in.gamma);
  VelocityAverage num = velocity_average(
      in.dimension, in.xi,
      [&](double xv) {
        const EigenRoots r = eigen_roots(in, xv);
        return 1.0 / (-r.lambda * r.nu) * (1.0 + 2.0 * p / (r.nu - r.lambda - 2.0 * p));
      },
      q);
  VelocityAverage inv = velocity_average(
      in.dimension, in.xi,
      [&](double xv) {
        const EigenRoots r = eigen_roots(in, xv);
        return 1.0 / (-r.lambda * (r.nu - r.lambda - 2.0 * p));
      },
      q);
  const cplx value = std::pow(in.eps, 1.0 + in.mu) * num.value / (1.0 - inv.value);
  return {value, num.error + inv.error};
}

TransferValue transfer_ballistic(const SpectralInputs& in, const QuadratureOptions& q) {
  if (in.mu != 0.0) {
    throw std::invalid_argument("transfer_ballistic requires mu = 0");
  }
  return transfer(in, q);
}

TransferValue transfer_diffusive(const SpectralInputs& in, const QuadratureOptions& q) {
  if (in.mu != 1.0) {
    throw std::invalid_argument("transfer_diffusive requires mu = 1");
  }
  return transfer(in, q);
}

cplx limit_H_1d(cplx eta) {
  const cplx r = std::sqrt(1.0 - eta * eta);
  return (1.0 + r) / ((1.0 + r) * (1.0 + r) - eta * eta);
}

VelocityAverage limit_H(int dimension, cplx eta, const QuadratureOptions& q) {
  if (dimension == 1) {
    return {limit_H_1d(eta), 0.0};
  }
  const cplx eta2 = eta * eta;
  VelocityAverage num = velocity_average(
      dimension, 1.0,
      [&](double u) {
        const cplx a = 1.0 + std::sqrt(1.0 - eta2 * u * u);
        return std::pow(a, 1.5) / (a * a - eta2 * u * u);
      },
      q);
  VelocityAverage den = velocity_average(
      dimension, 1.0, [&](double u) { return std::sqrt(1.0 + std::sqrt(1.0 - eta2 * u * u)); },
      q);
  return {num.value / den.value, num.error + den.error};
}

cplx ballistic_limit(double s, double xi, int dimension) {
  return 2.0 / s * limit_H(dimension, I * (xi / s)).value;
}

double diffusive_limit(double s, double xi, double diffusion_constant) {
  return 1.0 / (s + diffusion_constant * xi * xi);
}

double profile_F(double y) {
  const double a = std::abs(y);
  if (a > 1.0) {
    return 0.0;
  }
  if (a == 1.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 1.0 / (2.0 * std::numbers::pi * std::sqrt(1.0 - y * y));
}

double ballistic_profile_1d(double x, double t) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("profile needs t > 0");
  }
  return 2.0 * profile_F(x / t) / t;
}

double sokhotsky_profile(double y, double delta) {
  const cplx eta = -1.0 / cplx(y, delta);
  return -limit_H_1d(eta).imag() / (std::numbers::pi * y);
}

namespace {

template <class F>
double gk(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

constexpr double kHalfPi = std::numbers::pi / 2.0;

// Integral of (y + t w)^2 2F(w) dw with w = sin(theta).
double spread_second_moment(double y, double t) {
  return gk(
      [&](double th) {
        const double z = y + t * std::sin(th);
        return z * z / std::numbers::pi;
      },
      -kHalfPi, kHalfPi);
}

}  // namespace

double profile_moment(int k) {
  if (k < 0) {
    throw std::invalid_argument("moment order must be >= 0");
  }
  return gk([&](double th) { return std::pow(std::sin(th), k) / std::numbers::pi; }, -kHalfPi,
            kHalfPi);
}

double limit_msd_ballistic_at(const InitialDensity& rho_in, double t) {
  if (const auto* pm = std::get_if<PointMass>(&rho_in)) {
    return spread_second_moment(pm->at, t);
  }
  const Density& d = std::get<Density>(rho_in);
  if (!d.fn || !(d.hi > d.lo)) {
    throw std::invalid_argument("initial density needs a function and lo < hi");
  }
  const double mass = gk(d.fn, d.lo, d.hi);
  if (std::abs(mass - 1.0) > 1e-6) {
    throw std::invalid_argument("initial density is not normalized (mass " +
                                std::to_string(mass) + ")");
  }
  return gk([&](double y) { return d.fn(y) * spread_second_moment(y, t); }, d.lo, d.hi);
}

double limit_msd_ballistic(const InitialDensity& rho_in) {
  // MSD(t) is a quadratic in t; its second difference at unit spacing is 2 C0.
  const double m1 = limit_msd_ballistic_at(rho_in, 1.0);
  const double m2 = limit_msd_ballistic_at(rho_in, 2.0);
  const double m3 = limit_msd_ballistic_at(rho_in, 3.0);
  return (m3 - 2.0 * m2 + m1) / 2.0;
}

double diffusion_constant(GammaRegime regime, int dimension) {
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
  if (regime == GammaRegime::GammaZero) {
    return dimension == 1 ? (15.0 + 7.0 * std::sqrt(5.0)) / 10.0
                          : (15.0 + 7.0 * std::sqrt(5.0)) / 30.0;
  }
  return dimension == 1 ? 2.0 : 2.0 / 3.0;
}

double heat_kernel_msd(double C, int dimension, double t) {
  if (!(C > 0.0) || !(t >= 0.0)) {
    throw std::invalid_argument("heat_kernel_msd needs C > 0 and t >= 0");
  }
  return 2.0 * dimension * C * t;
}

}  // namespace rtsim
