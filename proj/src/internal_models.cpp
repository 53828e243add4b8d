#include "rtsim/internal_models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rtsim {

std::string_view to_string(DurationKind kind) {
  switch (kind) {
    case DurationKind::Ccw:
      return "ccw";
    case DurationKind::Cw:
      return "cw";
    case DurationKind::StoppingTime:
      return "stopping_time";
    case DurationKind::RunTime:
      return "run_time";
  }
  return "unknown";
}

std::string_view to_string(FlipRule rule) {
  return rule == FlipRule::Paper ? "paper" : "exact";
}

std::uint64_t step_count(double horizon, double dt) {
  return static_cast<std::uint64_t>(std::llround(horizon / dt));
}

namespace {

void require(bool ok, const char* what) {
  if (!ok) {
    throw std::invalid_argument(what);
  }
}

}  // namespace

void TwoStateParams::validate() const {
  require(t0 > 0.0 && std::isfinite(t0), "t0 must be finite and > 0");
  require(t1 > 0.0 && std::isfinite(t1), "t1 must be finite and > 0");
  require(ybar > 0.0 && std::isfinite(ybar), "ybar must be finite and > 0");
  require(dt > 0.0 && std::isfinite(dt), "dt must be finite and > 0");
  require(horizon > 0.0 && std::isfinite(horizon), "horizon must be finite and > 0");
  require(horizon >= dt, "horizon must cover at least one step");
  require(adaptation_time > 0.0, "adaptation_time must be > 0");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be finite and >= 0");
  require(std::isfinite(alpha1) && std::isfinite(alpha2), "alpha1/alpha2 must be finite");
  require(hist_hi > hist_lo, "histogram range must be non-empty");
  require(hist_bins > 0, "histogram needs at least one bin");
}

RateSpec TwoStateParams::rates(RateKind kind) const {
  return RateSpec{kind, t0, t1, alpha1, alpha2, ybar};
}

RateValue rate_ccw_to_cw(const TwoStateParams& params, double y) {
  return rate_eval(params.rates(RateKind::ExpCcwToCw), y);
}

RateValue rate_cw_to_ccw(const TwoStateParams& params, double y) {
  return rate_eval(params.rates(RateKind::ExpCwToCcw), y);
}

StateHistogram::StateHistogram(double lo_, double hi_, std::size_t bins)
    : lo(lo_), hi(hi_), ccw(bins), cw(bins), ccw_to_cw(bins), cw_to_ccw(bins) {}

std::ptrdiff_t StateHistogram::locate(double x) const {
  if (x < lo) {
    return -1;
  }
  if (x >= hi) {
    return static_cast<std::ptrdiff_t>(bins());
  }
  auto i = static_cast<std::ptrdiff_t>((x - lo) / bin_width());
  return std::min<std::ptrdiff_t>(i, static_cast<std::ptrdiff_t>(bins()) - 1);
}

void StateHistogram::merge(const StateHistogram& other) {
  for (std::size_t i = 0; i < bins(); ++i) {
    ccw[i] += other.ccw[i];
    cw[i] += other.cw[i];
    ccw_to_cw[i] += other.ccw_to_cw[i];
    cw_to_ccw[i] += other.cw_to_ccw[i];
  }
  underflow += other.underflow;
  overflow += other.overflow;
}

namespace {

struct TwoStateTrace {
  std::vector<double> ccw, cw;
  double ccw_left = -1.0, cw_left = -1.0;
  double ccw_open = -1.0, cw_open = -1.0;
  StateHistogram histogram;
  std::uint64_t clamps = 0;
};

bool accept_flip(FlipRule rule, double rate, double dt, double r) {
  const double x = rate * dt;
  if (rule == FlipRule::Paper) {
    return r <= x * std::exp(x);
  }
  return r <= -std::expm1(-x);
}

TwoStateTrace run_two_state_particle(const TwoStateParams& p, RngStream& rng) {
  TwoStateTrace trace;
  trace.histogram = StateHistogram(p.hist_lo, p.hist_hi, p.hist_bins);
  const DriftSpec drift = DriftSpec::from_adaptation_time(p.drift, p.adaptation_time);
  const RateSpec to_cw = p.rates(RateKind::ExpCcwToCw);
  const RateSpec to_ccw = p.rates(RateKind::ExpCwToCcw);
  const double sqrt_dt = std::sqrt(p.dt);
  const std::uint64_t n_steps = step_count(p.horizon, p.dt);

  bool ccw = rng.uniform() < 0.5;
  double dy = 0.0;
  std::uint64_t start = 0;
  bool first = true;

  for (std::uint64_t k = 1; k <= n_steps; ++k) {
    dy = em_step(drift, p.sigma, dy, p.dt, sqrt_dt * rng.normal());
    const RateValue rate = rate_eval(ccw ? to_cw : to_ccw, p.ybar + dy);
    trace.clamps += rate.clamped ? 1 : 0;
    const double r = rng.uniform();

    const std::ptrdiff_t bin = trace.histogram.locate(dy);
    const bool in_range = bin >= 0 && bin < static_cast<std::ptrdiff_t>(trace.histogram.bins());
    if (in_range) {
      (ccw ? trace.histogram.ccw : trace.histogram.cw)[bin] += 1;
    } else if (bin < 0) {
      ++trace.histogram.underflow;
    } else {
      ++trace.histogram.overflow;
    }

    if (accept_flip(p.flip_rule, rate.value, p.dt, r)) {
      if (in_range) {
        (ccw ? trace.histogram.ccw_to_cw : trace.histogram.cw_to_ccw)[bin] += 1;
      }
      const double length = static_cast<double>(k - start) * p.dt;
      if (first) {
        (ccw ? trace.ccw_left : trace.cw_left) = length;
        first = false;
      } else {
        (ccw ? trace.ccw : trace.cw).push_back(length);
      }
      ccw = !ccw;
      start = k;
    }
  }
  if (n_steps > start) {
    (ccw ? trace.ccw_open : trace.cw_open) = static_cast<double>(n_steps - start) * p.dt;
  }
  return trace;
}

}  // namespace

TwoStateResult simulate_two_state(const TwoStateParams& params, std::size_t n,
                                  std::uint64_t seed, const ParallelOptions& parallel) {
  params.validate();
  require(n >= 1, "two-state ensemble needs n >= 1");

  std::vector<TwoStateTrace> traces(n);
  parallel_for(n, parallel, [&](std::size_t i) {
    RngStream rng = RngStream::for_index(seed, i);
    traces[i] = run_two_state_particle(params, rng);
  });

  TwoStateResult out;
  out.ccw.kind = DurationKind::Ccw;
  out.cw.kind = DurationKind::Cw;
  for (DurationSamples* d : {&out.ccw, &out.cw}) {
    d->horizon = params.horizon;
    d->n_particles = n;
  }
  out.histogram = StateHistogram(params.hist_lo, params.hist_hi, params.hist_bins);
  for (const TwoStateTrace& t : traces) {
    out.ccw.samples.insert(out.ccw.samples.end(), t.ccw.begin(), t.ccw.end());
    out.cw.samples.insert(out.cw.samples.end(), t.cw.begin(), t.cw.end());
    if (t.ccw_left > 0.0) out.ccw.left_censored.push_back(t.ccw_left);
    if (t.cw_left > 0.0) out.cw.left_censored.push_back(t.cw_left);
    if (t.ccw_open > 0.0) out.ccw.censored.push_back(t.ccw_open);
    if (t.cw_open > 0.0) out.cw.censored.push_back(t.cw_open);
    out.histogram.merge(t.histogram);
    out.clamp_events += t.clamps;
  }
  return out;
}

void OneStateParams::validate() const {
  drift.validate();
  require(dt > 0.0 && std::isfinite(dt), "dt must be finite and > 0");
  require(horizon > 0.0 && std::isfinite(horizon), "horizon must be finite and > 0");
  require(horizon >= dt, "horizon must cover at least one step");
  require(sigma >= 0.0 && std::isfinite(sigma), "sigma must be finite and >= 0");
  require(std::isfinite(initial_state), "initial_state must be finite");
  require(rate == RateKind::StepIndicator || rate == RateKind::Unit,
          "one-state rate must be the step indicator or the unit rate");
}

namespace {

struct OneStateTrace {
  std::vector<double> stops;
  double open = -1.0;
};

OneStateTrace run_one_state_particle(const OneStateParams& p, RngStream& rng) {
  OneStateTrace trace;
  const RateSpec rate{p.rate};
  const double sqrt_dt = std::sqrt(p.dt);
  const std::uint64_t n_steps = step_count(p.horizon, p.dt);

  double m = p.initial_state;
  ClockState clock = clock_reset(rng);
  std::uint64_t start = 0;
  for (std::uint64_t k = 1; k <= n_steps; ++k) {
    m = em_step(p.drift, p.sigma, m, p.dt, sqrt_dt * rng.normal());
    const ClockAdvance adv = clock_advance(clock, rate_eval(rate, m).value, p.dt);
    clock = adv.clock;
    if (adv.fired) {
      trace.stops.push_back(static_cast<double>(k - start) * p.dt);
      m = 0.0;
      clock = clock_reset(rng);
      start = k;
    }
  }
  if (n_steps > start) {
    trace.open = static_cast<double>(n_steps - start) * p.dt;
  }
  return trace;
}

}  // namespace

DurationSamples simulate_one_state(const OneStateParams& params, std::size_t n,
                                   std::uint64_t seed, const ParallelOptions& parallel) {
  params.validate();
  require(n >= 1, "one-state ensemble needs n >= 1");

  std::vector<OneStateTrace> traces(n);
  parallel_for(n, parallel, [&](std::size_t i) {
    RngStream rng = RngStream::for_index(seed, i);
    traces[i] = run_one_state_particle(params, rng);
  });

  DurationSamples out;
  out.kind = DurationKind::StoppingTime;
  out.horizon = params.horizon;
  out.n_particles = n;
  for (const OneStateTrace& t : traces) {
    out.samples.insert(out.samples.end(), t.stops.begin(), t.stops.end());
    if (t.open > 0.0) {
      out.censored.push_back(t.open);
    }
  }
  return out;
}

}  // namespace rtsim
