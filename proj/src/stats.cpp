#include "rtsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace rtsim {

MsdCurve msd(const EnsembleRecord& record) {
  if (record.times.empty()) {
    throw std::invalid_argument("msd needs at least one observation time");
  }
  const std::size_t n = record.n_particles();
  if (n == 0) {
    throw std::invalid_argument("msd of an empty ensemble");
  }
  const auto d = static_cast<std::size_t>(record.dimension());
  const std::vector<double>& x0 = record.positions.front();
  MsdCurve out;
  out.times = record.times;
  out.n_particles = n;
  out.values.reserve(record.times.size());
  for (const std::vector<double>& x : record.positions) {
    double sum = 0.0;
    for (std::size_t k = 0; k < n * d; ++k) {
      const double dx = x[k] - x0[k];
      sum += dx * dx;
    }
    out.values.push_back(sum / static_cast<double>(n));
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw std::invalid_argument("log_grid needs 0 < lo < hi and n >= 2");
  }
  std::vector<double> out(n);
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t n) {
  if (!(hi > lo) || n < 2) {
    throw std::invalid_argument("linear_grid needs lo < hi and n >= 2");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

namespace {

// Product-limit estimate with censored lengths as right-censored observations.
std::vector<double> kaplan_meier(const DurationSamples& s, std::span<const double> grid) {
  std::map<double, std::pair<std::size_t, std::size_t>> at;  // time -> (events, censored)
  for (double x : s.samples) ++at[x].first;
  for (double x : s.censored) ++at[x].second;
  std::size_t at_risk = s.samples.size() + s.censored.size();
  std::vector<std::pair<double, double>> steps;  // (time, S after time)
  double surv = 1.0;
  for (const auto& [t, c] : at) {
    if (c.first > 0 && at_risk > 0) {
      surv *= 1.0 - static_cast<double>(c.first) / static_cast<double>(at_risk);
      steps.emplace_back(t, surv);
    }
    at_risk -= c.first + c.second;
  }
  std::vector<double> p;
  p.reserve(grid.size());
  for (double t : grid) {
    auto it = std::upper_bound(steps.begin(), steps.end(), t,
                               [](double v, const auto& e) { return v < e.first; });
    p.push_back(it == steps.begin() ? 1.0 : std::prev(it)->second);
  }
  return p;
}

}  // namespace

SurvivalCurve survival_cdf(const DurationSamples& samples, std::span<const double> grid,
                           const SurvivalOptions& options) {
  if (samples.samples.empty()) {
    throw std::invalid_argument("survival_cdf needs at least one completed sample");
  }
  SurvivalCurve out;
  out.t.assign(grid.begin(), grid.end());
  if (!std::is_sorted(out.t.begin(), out.t.end())) {
    throw std::invalid_argument("survival grid must be sorted");
  }
  if (options.kaplan_meier) {
    out.p = kaplan_meier(samples, grid);
    return out;
  }
  std::vector<double> sorted = samples.samples;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  out.p.reserve(grid.size());
  for (double t : grid) {
    const auto above = sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t);
    out.p.push_back(static_cast<double>(above) / n);
  }
  return out;
}

SurvivalCurve survival_cdf(const DurationSamples& samples, const SurvivalOptions& options) {
  if (samples.samples.empty()) {
    throw std::invalid_argument("survival_cdf needs at least one completed sample");
  }
  const auto [lo, hi] = std::minmax_element(samples.samples.begin(), samples.samples.end());
  if (!(*hi > *lo)) {
    const std::vector<double> grid{*lo};
    return survival_cdf(samples, grid, options);
  }
  return survival_cdf(samples, log_grid(*lo, *hi, 64), options);
}

namespace {

FitResult fit_windowed(std::span<const double> t, std::span<const double> y, FitWindow window,
                       bool log_x) {
  if (t.size() != y.size()) {
    throw std::invalid_argument("fit: t and y differ in length");
  }
  if (!(window.lo < window.hi)) {
    throw std::invalid_argument("fit: window needs lo < hi");
  }
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < window.lo || t[i] > window.hi) {
      continue;
    }
    if (!(y[i] > 0.0)) {
      throw std::invalid_argument("fit: nonpositive value at t = " + std::to_string(t[i]));
    }
    if (log_x && !(t[i] > 0.0)) {
      throw std::invalid_argument("fit: nonpositive abscissa in log-log window");
    }
    xs.push_back(log_x ? std::log(t[i]) : t[i]);
    ys.push_back(std::log(y[i]));
  }
  if (xs.size() < 3) {
    throw std::invalid_argument("fit: fewer than 3 points in window [" +
                                std::to_string(window.lo) + ", " + std::to_string(window.hi) +
                                "]");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("fit: all abscissae in the window coincide");
  }
  FitResult r;
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  r.lo = window.lo;
  r.hi = window.hi;
  r.n_points = xs.size();
  r.mean_log_value = my;
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (r.intercept + r.slope * xs[i]);
    ss += e * e;
  }
  r.residual_rms = std::sqrt(ss / n);
  return r;
}

}  // namespace

FitResult fit_loglog(std::span<const double> t, std::span<const double> y, FitWindow window) {
  return fit_windowed(t, y, window, true);
}

FitResult fit_semilog(std::span<const double> t, std::span<const double> y, FitWindow window) {
  return fit_windowed(t, y, window, false);
}

std::size_t rice_bins(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(2.0 * std::cbrt(static_cast<double>(n))));
}

std::vector<RescaledPdf> rescaled_displacement_pdf(const EnsembleRecord& record, double t_anchor,
                                                   std::span<const double> lags, double beta,
                                                   std::size_t bins) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("beta must lie in (0, 1]");
  }
  if (lags.empty()) {
    throw std::invalid_argument("rescaled_displacement_pdf needs at least one lag");
  }
  const std::size_t n = record.n_particles();
  const std::size_t j0 = record.time_index(t_anchor);
  std::vector<std::vector<double>> values;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double lag : lags) {
    if (!(lag > 0.0)) {
      throw std::invalid_argument("lags must be > 0");
    }
    const std::size_t j1 = record.time_index(t_anchor + lag);
    const double scale = std::pow(lag, beta);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = (record.position(j1, i)[0] - record.position(j0, i)[0]) / scale;
      lo = std::min(lo, v[i]);
      hi = std::max(hi, v[i]);
    }
    values.push_back(std::move(v));
  }
  if (bins == 0) {
    bins = rice_bins(n);
  }
  if (!(hi > lo)) {
    // All values coincide: centre a unit-width range on them.
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<double> edges(bins + 1);
  for (std::size_t b = 0; b <= bins; ++b) {
    edges[b] = lo + width * static_cast<double>(b);
  }
  edges.back() = hi;

  std::vector<RescaledPdf> out;
  for (std::size_t k = 0; k < lags.size(); ++k) {
    RescaledPdf pdf;
    pdf.lag = lags[k];
    pdf.edges = edges;
    pdf.n_samples = n;
    std::vector<double> counts(bins, 0.0);
    for (double v : values[k]) {
      auto b = static_cast<std::size_t>((v - lo) / width);
      counts[std::min(b, bins - 1)] += 1.0;
    }
    pdf.density.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) {
      pdf.density[b] = counts[b] / (static_cast<double>(n) * width);
    }
    out.push_back(std::move(pdf));
  }
  return out;
}

double collapse_exponent(double beta0) {
  if (!(beta0 < 3.0)) {
    throw std::invalid_argument("collapse exponent needs beta0 < 3");
  }
  return 1.0 / (3.0 - beta0);
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf,
                    double lattice_step) {
  if (samples.empty()) {
    throw std::invalid_argument("ks_statistic needs samples");
  }
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  if (lattice_step <= 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double f = cdf(x[i]);
      d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
  }
  // Both the empirical and the lattice CDF are constant between lattice points,
  // so the supremum is attained at a sample value or one step before one.
  std::size_t i = 0;
  while (i < x.size()) {
    const double v = x[i];
    const double below = cdf(v - lattice_step);
    d = std::max(d, std::abs(static_cast<double>(i) / n - below));
    while (i < x.size() && x[i] <= v + 0.5 * lattice_step) {
      ++i;
    }
    d = std::max(d, std::abs(static_cast<double>(i) / n - cdf(v)));
  }
  return d;
}

double ks_critical_1pct(std::size_t n) { return 1.63 / std::sqrt(static_cast<double>(n)); }

}  // namespace rtsim
