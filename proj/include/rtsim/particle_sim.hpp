#pragma once

// Individual-based run-and-tumble model: constant-speed transport coupled to
// the one-state internal dynamics, with the direction resampled uniformly
// every time the internal clock fires.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "rtsim/internal_models.hpp"
#include "rtsim/parallel.hpp"
#include "rtsim/rng.hpp"
#include "rtsim/sde.hpp"

namespace rtsim {

using Vec3 = std::array<double, 3>;

/// What a recorded "run" spans.
enum class RunTimeConvention {
  DirectionChange,  ///< between consecutive changes of the movement direction
  Firing,           ///< between consecutive clock firings (resamplings)
};

std::string_view to_string(RunTimeConvention convention);

struct IbmParams {
  int dimension = 1;
  double speed = 0.02;
  OneStateParams internal{DriftSpec{DriftKind::SignStep, 0.0}, std::sqrt(2.0), 1.0, 1e6,
                          RateKind::StepIndicator, 0.0};
  std::size_t n_particles = 1000;
  /// Requested observation times; snapped to the step grid. t = 0 is always
  /// recorded. Empty means log_spaced_times(dt, horizon, 32).
  std::vector<double> observation_times;
  std::uint64_t master_seed = 1;
  RunTimeConvention convention = RunTimeConvention::DirectionChange;
  bool store_full_state = false;

  void validate() const;
};

/// Log-spaced times from dt to horizon (`per_decade` points per decade),
/// snapped to multiples of dt, merged with `extra`, deduplicated and sorted.
/// Always starts at 0 and ends at horizon.
std::vector<double> log_spaced_times(double dt, double horizon, int per_decade,
                                     std::span<const double> extra = {});

struct ParticleState {
  Vec3 x{};
  Vec3 v{};
  double m = 0.0;
  ClockState clock;
};

/// Uniform draw on the unit sphere S^{d-1}; unused trailing components are 0.
Vec3 resample_direction(int dimension, RngStream& rng);

struct StepResult {
  ParticleState state;
  bool fired = false;
};

/// One time step: Euler-Maruyama on m, clock advance at the post-step rate,
/// transport with the pre-firing direction, then reset of m, the clock and
/// the direction if the clock fired.
StepResult step_ibm(const ParticleState& state, const IbmParams& params, RngStream& rng);

struct EnsembleRecord {
  IbmParams params;
  /// Observation times actually recorded (multiples of dt, first is 0).
  std::vector<double> times;
  /// positions[j] holds n_particles * dimension coordinates at times[j],
  /// particle-major.
  std::vector<std::vector<double>> positions;
  /// Only filled with store_full_state: internal state and direction.
  std::vector<std::vector<double>> internal_states;
  std::vector<std::vector<double>> directions;
  DurationSamples run_times;
  /// run_lengths[i] is the distance covered during run_times.samples[i].
  std::vector<double> run_lengths;
  /// Particle that produced run_times.samples[i].
  std::vector<std::size_t> run_particles;
  std::vector<std::uint64_t> seeds;

  std::size_t n_particles() const { return params.n_particles; }
  int dimension() const { return params.dimension; }
  std::span<const double> position(std::size_t obs, std::size_t particle) const;
  /// Index of the observation at time t (relative tolerance 1e-9); throws
  /// std::out_of_range if absent.
  std::size_t time_index(double t) const;
};

EnsembleRecord run_ensemble(const IbmParams& params, const ParallelOptions& parallel = {});

}  // namespace rtsim
