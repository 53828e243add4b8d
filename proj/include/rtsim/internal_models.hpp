#pragma once

// Intracellular switching models that produce duration samples: the
// two-state CCW/CW model driven by an OU concentration, and the one-state
// model whose Poisson clock is gated by the sign of the internal state.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "rtsim/parallel.hpp"
#include "rtsim/sde.hpp"

namespace rtsim {

enum class DurationKind { Ccw, Cw, StoppingTime, RunTime };

std::string_view to_string(DurationKind kind);

/// Completed event durations from an ensemble run.
///
/// `samples` holds only completed events. Events still open at the horizon
/// go to `censored` (their elapsed length) and first intervals whose start
/// precedes the observation window go to `left_censored`; neither enters a
/// survival curve unless a censoring correction is requested.
struct DurationSamples {
  DurationKind kind = DurationKind::StoppingTime;
  std::vector<double> samples;
  std::vector<double> censored;
  std::vector<double> left_censored;
  double horizon = 0.0;
  std::size_t n_particles = 0;

  std::size_t censored_count() const { return censored.size(); }
};

/// Acceptance rule for a state flip in one step of length dt at rate L.
enum class FlipRule {
  Paper,  ///< r <= L dt exp(L dt), as printed in the reference algorithm
  Exact,  ///< r <= 1 - exp(-L dt)
};

std::string_view to_string(FlipRule rule);

struct TwoStateParams {
  double alpha1 = 10.0;
  double alpha2 = -2.0;
  double t0 = 300.0;
  double t1 = 30.0;
  double ybar = 5.0;
  double adaptation_time = 6000.0;
  double sigma = 0.456;
  double dt = 0.1;
  double horizon = 6e5;
  DriftKind drift = DriftKind::OrnsteinUhlenbeck;
  FlipRule flip_rule = FlipRule::Paper;
  double hist_lo = -150.0;
  double hist_hi = 150.0;
  std::size_t hist_bins = 300;

  void validate() const;
  RateSpec rates(RateKind kind) const;
};

/// Switching rate CCW -> CW at concentration y (clamped against overflow).
RateValue rate_ccw_to_cw(const TwoStateParams& params, double y);
/// Switching rate CW -> CCW at concentration y.
RateValue rate_cw_to_ccw(const TwoStateParams& params, double y);

/// Occupancy of Delta Y = Y - Ybar per rotational state (counted once per
/// step) and the Delta Y values at which flips happened.
struct StateHistogram {
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::uint64_t> ccw;
  std::vector<std::uint64_t> cw;
  std::vector<std::uint64_t> ccw_to_cw;
  std::vector<std::uint64_t> cw_to_ccw;
  std::uint64_t underflow = 0;
  std::uint64_t overflow = 0;

  StateHistogram() = default;
  StateHistogram(double lo, double hi, std::size_t bins);

  std::size_t bins() const { return ccw.size(); }
  double bin_width() const { return (hi - lo) / static_cast<double>(bins()); }
  /// Bin index of x, or -1 / bins() for under/overflow.
  std::ptrdiff_t locate(double x) const;
  void merge(const StateHistogram& other);
};

struct TwoStateResult {
  DurationSamples ccw;
  DurationSamples cw;
  StateHistogram histogram;
  std::uint64_t clamp_events = 0;
};

TwoStateResult simulate_two_state(const TwoStateParams& params, std::size_t n,
                                  std::uint64_t seed, const ParallelOptions& parallel = {});

struct OneStateParams {
  DriftSpec drift{DriftKind::SignStep, 1.0 / 6000.0};
  double sigma = 0.456;
  double dt = 0.1;
  double horizon = 6e5;
  RateKind rate = RateKind::StepIndicator;
  double initial_state = 0.0;

  void validate() const;
};

DurationSamples simulate_one_state(const OneStateParams& params, std::size_t n,
                                   std::uint64_t seed, const ParallelOptions& parallel = {});

/// Number of whole steps covering `horizon` (rounded to nearest).
std::uint64_t step_count(double horizon, double dt);

}  // namespace rtsim
