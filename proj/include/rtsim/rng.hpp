#pragma once

#include <cstdint>
#include <random>

namespace rtsim {

/// SplitMix64 finalizer. Used to derive decorrelated per-stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the stream owned by `index` under `master`. The mapping depends
/// only on the pair, so serial and parallel runs draw identical numbers.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index);

/// A random stream owned by one particle (or one test).
///
/// Uniforms are built from the top 53 bits of a 64-bit Mersenne Twister and
/// normals from the Marsaglia polar method, so the sequence is fixed by the
/// seed alone and does not depend on the standard library's distributions.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  static RngStream for_index(std::uint64_t master, std::uint64_t index) {
    return RngStream(stream_seed(master, index));
  }

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on (0, 1]; never returns 0, so -log(u) is finite.
  double uniform_pos();

  /// Standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rtsim
