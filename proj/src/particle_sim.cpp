#include "rtsim/particle_sim.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>

namespace rtsim {

std::string_view to_string(RunTimeConvention convention) {
  return convention == RunTimeConvention::DirectionChange ? "direction_change" : "firing";
}

void IbmParams::validate() const {
  if (dimension < 1 || dimension > 3) {
    throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
  if (!(speed > 0.0) || !std::isfinite(speed)) {
    throw std::invalid_argument("speed must be finite and > 0");
  }
  if (n_particles < 1) {
    throw std::invalid_argument("n_particles must be >= 1");
  }
  internal.validate();
  for (std::size_t i = 0; i < observation_times.size(); ++i) {
    const double t = observation_times[i];
    if (!(t >= 0.0) || t > internal.horizon * (1.0 + 1e-12)) {
      throw std::invalid_argument("observation_times must lie in [0, horizon]");
    }
    if (i > 0 && !(t > observation_times[i - 1])) {
      throw std::invalid_argument("observation_times must be strictly increasing");
    }
  }
}

std::vector<double> log_spaced_times(double dt, double horizon, int per_decade,
                                     std::span<const double> extra) {
  if (!(dt > 0.0) || !(horizon >= dt) || per_decade < 1) {
    throw std::invalid_argument("log_spaced_times needs 0 < dt <= horizon and per_decade >= 1");
  }
  const std::uint64_t last = step_count(horizon, dt);
  std::vector<std::uint64_t> steps{0, last};
  const double decades = std::log10(horizon / dt);
  const int n = static_cast<int>(std::ceil(decades * per_decade));
  for (int j = 0; j <= n; ++j) {
    const double t = dt * std::pow(10.0, static_cast<double>(j) / per_decade);
    steps.push_back(std::min<std::uint64_t>(step_count(t, dt), last));
  }
  for (double t : extra) {
    if (t < 0.0 || t > horizon * (1.0 + 1e-12)) {
      throw std::invalid_argument("extra observation time outside [0, horizon]");
    }
    steps.push_back(step_count(t, dt));
  }
  std::sort(steps.begin(), steps.end());
  steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
  std::vector<double> out;
  out.reserve(steps.size());
  for (std::uint64_t k : steps) {
    out.push_back(static_cast<double>(k) * dt);
  }
  return out;
}

Vec3 resample_direction(int dimension, RngStream& rng) {
  switch (dimension) {
    case 1:
      return {rng.uniform() < 0.5 ? 1.0 : -1.0, 0.0, 0.0};
    case 2: {
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      return {std::cos(theta), std::sin(theta), 0.0};
    }
    case 3: {
      const double z = 2.0 * rng.uniform() - 1.0;
      const double phi = 2.0 * std::numbers::pi * rng.uniform();
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      return {r * std::cos(phi), r * std::sin(phi), z};
    }
    default:
      throw std::invalid_argument("dimension must be 1, 2 or 3");
  }
}

namespace {

struct StepContext {
  RateSpec rate;
  double sqrt_dt;
  double displacement;
};

StepContext make_context(const IbmParams& params) {
  return {RateSpec{params.internal.rate}, std::sqrt(params.internal.dt),
          params.speed * params.internal.dt};
}

bool step_in_place(ParticleState& s, const IbmParams& params, const StepContext& ctx,
                   RngStream& rng) {
  const OneStateParams& p = params.internal;
  s.m = em_step(p.drift, p.sigma, s.m, p.dt, ctx.sqrt_dt * rng.normal());
  const ClockAdvance adv = clock_advance(s.clock, rate_eval(ctx.rate, s.m).value, p.dt);
  s.clock = adv.clock;
  for (int c = 0; c < params.dimension; ++c) {
    s.x[c] += ctx.displacement * s.v[c];
  }
  if (adv.fired) {
    s.m = 0.0;
    s.clock = clock_reset(rng);
    s.v = resample_direction(params.dimension, rng);
  }
  return adv.fired;
}

}  // namespace

StepResult step_ibm(const ParticleState& state, const IbmParams& params, RngStream& rng) {
  StepResult out{state, false};
  out.fired = step_in_place(out.state, params, make_context(params), rng);
  return out;
}

std::span<const double> EnsembleRecord::position(std::size_t obs, std::size_t particle) const {
  const auto d = static_cast<std::size_t>(dimension());
  return std::span<const double>(positions.at(obs)).subspan(particle * d, d);
}

std::size_t EnsembleRecord::time_index(double t) const {
  for (std::size_t j = 0; j < times.size(); ++j) {
    if (std::abs(times[j] - t) <= 1e-9 * std::max(1.0, std::abs(t))) {
      return j;
    }
  }
  throw std::out_of_range("observation time " + std::to_string(t) + " not recorded");
}

namespace {

struct RunTrace {
  std::vector<double> runs;
  double open = -1.0;
};

}  // namespace

EnsembleRecord run_ensemble(const IbmParams& params, const ParallelOptions& parallel) {
  params.validate();
  const OneStateParams& p = params.internal;
  const std::size_t n = params.n_particles;
  const auto d = static_cast<std::size_t>(params.dimension);
  const std::uint64_t n_steps = step_count(p.horizon, p.dt);

  EnsembleRecord rec;
  rec.params = params;
  if (params.observation_times.empty()) {
    rec.times = log_spaced_times(p.dt, p.horizon, 32);
  } else {
    std::vector<double> requested{0.0};
    for (double t : params.observation_times) {
      const double snapped = static_cast<double>(step_count(t, p.dt)) * p.dt;
      if (snapped > requested.back()) {
        requested.push_back(snapped);
      }
    }
    rec.times = std::move(requested);
  }
  std::vector<std::uint64_t> obs_steps;
  for (double t : rec.times) {
    obs_steps.push_back(step_count(t, p.dt));
  }
  rec.positions.assign(rec.times.size(), std::vector<double>(n * d, 0.0));
  if (params.store_full_state) {
    rec.internal_states.assign(rec.times.size(), std::vector<double>(n, 0.0));
    rec.directions.assign(rec.times.size(), std::vector<double>(n * d, 0.0));
  }
  rec.seeds.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    rec.seeds[i] = stream_seed(params.master_seed, i);
  }

  const StepContext ctx = make_context(params);
  std::vector<RunTrace> traces(n);
  parallel_for(n, parallel, [&](std::size_t i) {
    RngStream rng(rec.seeds[i]);
    ParticleState s;
    s.v = resample_direction(params.dimension, rng);
    s.clock = clock_reset(rng);
    RunTrace& trace = traces[i];

    auto record = [&](std::size_t j) {
      std::copy_n(s.x.begin(), d, rec.positions[j].begin() + static_cast<std::ptrdiff_t>(i * d));
      if (params.store_full_state) {
        rec.internal_states[j][i] = s.m;
        std::copy_n(s.v.begin(), d,
                    rec.directions[j].begin() + static_cast<std::ptrdiff_t>(i * d));
      }
    };

    std::size_t next_obs = 0;
    while (next_obs < obs_steps.size() && obs_steps[next_obs] == 0) {
      record(next_obs++);
    }
    std::uint64_t run_start = 0;
    for (std::uint64_t k = 1; k <= n_steps; ++k) {
      const Vec3 before = s.v;
      if (step_in_place(s, params, ctx, rng)) {
        const bool ends_run = params.convention == RunTimeConvention::Firing || s.v != before;
        if (ends_run) {
          trace.runs.push_back(static_cast<double>(k - run_start) * p.dt);
          run_start = k;
        }
      }
      while (next_obs < obs_steps.size() && obs_steps[next_obs] == k) {
        record(next_obs++);
      }
    }
    if (n_steps > run_start) {
      trace.open = static_cast<double>(n_steps - run_start) * p.dt;
    }
  });

  rec.run_times.kind = DurationKind::RunTime;
  rec.run_times.horizon = p.horizon;
  rec.run_times.n_particles = n;
  for (std::size_t i = 0; i < n; ++i) {
    const RunTrace& t = traces[i];
    rec.run_times.samples.insert(rec.run_times.samples.end(), t.runs.begin(), t.runs.end());
    rec.run_particles.insert(rec.run_particles.end(), t.runs.size(), i);
    if (t.open > 0.0) {
      rec.run_times.censored.push_back(t.open);
    }
  }
  rec.run_lengths.reserve(rec.run_times.samples.size());
  for (double r : rec.run_times.samples) {
    rec.run_lengths.push_back(params.speed * r);
  }
  return rec;
}

}  // namespace rtsim
