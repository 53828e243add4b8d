#pragma once

#include <cstddef>
#include <functional>

namespace rtsim {

/// Worker-pool settings shared by the ensemble simulators.
struct ParallelOptions {
  unsigned workers = 1;
  /// Called with (completed, total) every `progress_every` finished tasks.
  std::function<void(std::size_t, std::size_t)> progress;
  std::size_t progress_every = 100;
};

/// Runs task(i) for i in [0, count) on `options.workers` threads. Tasks are
/// handed out dynamically; callers must write results into slot i only.
/// The first exception thrown by a task is rethrown after all workers join.
void parallel_for(std::size_t count, const ParallelOptions& options,
                  const std::function<void(std::size_t)>& task);

}  // namespace rtsim
