#include "rtsim/sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rtsim {

void DriftSpec::validate() const {
  if (!std::isfinite(inverse_time) || inverse_time < 0.0) {
    throw std::invalid_argument("drift inverse_time must be finite and >= 0");
  }
}

DriftSpec DriftSpec::from_adaptation_time(DriftKind kind, double adaptation_time) {
  if (!(adaptation_time > 0.0)) {
    throw std::invalid_argument("adaptation time must be > 0");
  }
  DriftSpec spec{kind, std::isinf(adaptation_time) ? 0.0 : 1.0 / adaptation_time};
  spec.validate();
  return spec;
}

double sign0(double m) { return m >= 0.0 ? 1.0 : -1.0; }

double drift_eval(const DriftSpec& spec, double m) {
  if (spec.inverse_time == 0.0) {
    return 0.0;
  }
  const double g = spec.kind == DriftKind::OrnsteinUhlenbeck ? m : sign0(m);
  return -spec.inverse_time * g;
}

double em_step(const DriftSpec& spec, double sigma, double m, double dt, double dB) {
  return m + drift_eval(spec, m) * dt + sigma * dB;
}

namespace {

RateValue exp_rate(double inverse_scale, double alpha, double y, double ybar) {
  double exponent = alpha * (y - ybar) / ybar;
  RateValue out;
  if (exponent > kMaxRateExponent) {
    exponent = kMaxRateExponent;
    out.clamped = true;
  }
  // Floor keeps the rate positive; underflow is not counted as a clamp event.
  exponent = std::max(exponent, -kMaxRateExponent);
  out.value = inverse_scale * std::exp(exponent);
  return out;
}

}  // namespace

RateValue rate_eval(const RateSpec& spec, double x) {
  switch (spec.kind) {
    case RateKind::StepIndicator:
      return {x >= 0.0 ? 1.0 : 0.0, false};
    case RateKind::Unit:
      return {1.0, false};
    case RateKind::ExpCcwToCw:
      return exp_rate(1.0 / spec.t0, spec.alpha1, x, spec.ybar);
    case RateKind::ExpCwToCcw:
      return exp_rate(1.0 / spec.t1, spec.alpha2, x, spec.ybar);
  }
  throw std::logic_error("unhandled RateKind");
}

ClockAdvance clock_advance(ClockState clock, double rate, double dt) {
  if (!(rate >= 0.0)) {
    throw std::invalid_argument("clock rate must be >= 0");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("clock step must be > 0");
  }
  clock.accumulated += rate * dt;
  return {clock, clock.accumulated >= clock.threshold};
}

ClockState clock_from_uniform(double u) {
  if (!(u > 0.0 && u <= 1.0)) {
    throw std::invalid_argument("clock uniform must lie in (0, 1]");
  }
  double threshold = -std::log(u);
  // Thresholds stay strictly positive; u == 1 maps to the smallest normal double.
  if (threshold <= 0.0) {
    threshold = std::numeric_limits<double>::min();
  }
  return {0.0, threshold};
}

ClockState clock_reset(RngStream& rng) { return clock_from_uniform(rng.uniform_pos()); }

}  // namespace rtsim
