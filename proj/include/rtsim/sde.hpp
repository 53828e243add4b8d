#pragma once

// Shared stochastic machinery: drift functions, the Euler-Maruyama step and
// the integrated-rate Poisson clock.

#include "rtsim/rng.hpp"

namespace rtsim {

enum class DriftKind {
  OrnsteinUhlenbeck,  ///< g(m) = m
  SignStep,           ///< g(m) = sgn0(m), with sgn0(0) = +1
};

/// Adaptation drift -inverse_time * g(m). inverse_time = 0 encodes an
/// infinite adaptation time (no drift).
struct DriftSpec {
  DriftKind kind = DriftKind::SignStep;
  double inverse_time = 0.0;

  /// Throws std::invalid_argument unless inverse_time is finite and >= 0.
  void validate() const;

  /// Builds the spec from an adaptation time, mapping +inf to 0.
  static DriftSpec from_adaptation_time(DriftKind kind, double adaptation_time);
};

double sign0(double m);

double drift_eval(const DriftSpec& spec, double m);

/// One Euler-Maruyama step: m + drift(m) dt + sigma dB, dB ~ N(0, dt) supplied
/// by the caller.
double em_step(const DriftSpec& spec, double sigma, double m, double dt, double dB);

enum class RateKind {
  StepIndicator,  ///< 1 for m >= 0, else 0
  Unit,           ///< constant 1 (diagnostic)
  ExpCcwToCw,     ///< t0^-1 exp(alpha1 (Y - Ybar) / Ybar)
  ExpCwToCcw,     ///< t1^-1 exp(alpha2 (Y - Ybar) / Ybar)
};

struct RateSpec {
  RateKind kind = RateKind::StepIndicator;
  double t0 = 300.0;
  double t1 = 30.0;
  double alpha1 = 10.0;
  double alpha2 = -2.0;
  double ybar = 5.0;
};

/// Largest exponent fed to exp() before the rate is clamped.
inline constexpr double kMaxRateExponent = 700.0;

struct RateValue {
  double value = 0.0;
  bool clamped = false;
};

/// Evaluates the rate at `x` (internal state m for StepIndicator/Unit,
/// concentration Y for the exponential kinds).
RateValue rate_eval(const RateSpec& spec, double x);

/// Poisson clock driven by an integrated rate: fires when the accumulator
/// reaches the exponential threshold.
struct ClockState {
  double accumulated = 0.0;
  double threshold = 1.0;
};

struct ClockAdvance {
  ClockState clock;
  bool fired = false;
};

/// Adds rate * dt to the accumulator. Throws std::invalid_argument for a
/// negative rate or a non-positive step.
ClockAdvance clock_advance(ClockState clock, double rate, double dt);

/// Fresh clock with threshold -log(u) for u in (0, 1].
ClockState clock_from_uniform(double u);

ClockState clock_reset(RngStream& rng);

}  // namespace rtsim
