#pragma once

// Estimators over ensemble output: MSD, survival curves, windowed
// least-squares fits and rescaled displacement histograms.

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "rtsim/internal_models.hpp"
#include "rtsim/particle_sim.hpp"

namespace rtsim {

struct MsdCurve {
  std::vector<double> times;
  std::vector<double> values;
  std::size_t n_particles = 0;
};

/// Mean squared displacement from each particle's first recorded position.
MsdCurve msd(const EnsembleRecord& record);

struct SurvivalCurve {
  std::vector<double> t;
  std::vector<double> p;
};

/// `n` log-spaced points on [lo, hi] (inclusive).
std::vector<double> log_grid(double lo, double hi, std::size_t n);
/// `n` equally spaced points on [lo, hi] (inclusive).
std::vector<double> linear_grid(double lo, double hi, std::size_t n);

struct SurvivalOptions {
  /// Product-limit correction for right-censored intervals.
  bool kaplan_meier = false;
};

/// P(T > t) on `grid` from completed samples. With kaplan_meier the
/// censored lengths enter as right-censored observations.
SurvivalCurve survival_cdf(const DurationSamples& samples, std::span<const double> grid,
                           const SurvivalOptions& options = {});
/// Default grid: 64 log-spaced points from the smallest to the largest sample.
SurvivalCurve survival_cdf(const DurationSamples& samples, const SurvivalOptions& options = {});

struct FitWindow {
  double lo = 0.0;
  double hi = 0.0;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double residual_rms = 0.0;
  /// Mean of the fitted log-values; used for relative residuals.
  double mean_log_value = 0.0;
  std::size_t n_points = 0;
};

/// OLS of log(y) on log(t) over points with t in [lo, hi].
/// Throws std::invalid_argument with fewer than 3 points or a y <= 0 inside.
FitResult fit_loglog(std::span<const double> t, std::span<const double> y, FitWindow window);
/// OLS of log(y) on t; slope is minus the decay rate.
FitResult fit_semilog(std::span<const double> t, std::span<const double> y, FitWindow window);

inline FitResult fit_loglog(const MsdCurve& c, FitWindow w) { return fit_loglog(c.times, c.values, w); }
inline FitResult fit_loglog(const SurvivalCurve& c, FitWindow w) { return fit_loglog(c.t, c.p, w); }
inline FitResult fit_semilog(const SurvivalCurve& c, FitWindow w) { return fit_semilog(c.t, c.p, w); }

/// Histogram bin count ceil(2 n^(1/3)).
std::size_t rice_bins(std::size_t n);

struct RescaledPdf {
  double lag = 0.0;
  std::vector<double> edges;    // bins + 1
  std::vector<double> density;  // integrates to 1 over edges
  std::size_t n_samples = 0;
};

/// Densities of (x(t_anchor + lag) - x(t_anchor)) / lag^beta per lag, sharing
/// one set of edges spanning all lags. For d >= 2 the first coordinate is used.
/// bins = 0 selects the Rice rule.
std::vector<RescaledPdf> rescaled_displacement_pdf(const EnsembleRecord& record, double t_anchor,
                                                   std::span<const double> lags, double beta,
                                                   std::size_t bins = 0);

/// Histogram exponent that collapses a superdiffusive MSD ~ t^beta0.
double collapse_exponent(double beta0);

/// Two-sided Kolmogorov-Smirnov distance between the samples and `cdf`.
/// With lattice_step > 0 the samples are taken to live on multiples of the
/// step and the distance is evaluated at lattice points only.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf,
                    double lattice_step = 0.0);

/// Asymptotic 1% critical value 1.63 / sqrt(n).
double ks_critical_1pct(std::size_t n);

}  // namespace rtsim
