#pragma once

#include <cstdint>

namespace fgl {

/// Seed plus stream identifier; the pair fully determines a generator's output.
struct RngSeed {
  uint64_t seed = 0;
  uint64_t stream = 0;
};

/// Splittable 64-bit generator built on the splitmix64 finalizer. The stream
/// id is mixed into the initial state, so independent batches can draw from
/// independent streams in parallel and still reproduce bit-for-bit.
///
/// All distributions are implemented here rather than via <random> because
/// the standard distributions are implementation-defined and would break
/// cross-toolchain reproducibility of generated data.
class Rng {
 public:
  explicit Rng(RngSeed s);
  Rng(uint64_t seed, uint64_t stream) : Rng(RngSeed{seed, stream}) {}

  uint64_t next_u64();

  /// Uniform on [0,1), 53 random bits.
  double next_double();

  /// Uniform on [lo, hi).
  double next_uniform(double lo, double hi);

  /// Standard normal via Box-Muller; the second value of each pair is cached.
  double next_normal();

  /// Uniform integer in [0, bound), bound > 0.
  uint64_t next_below(uint64_t bound);

 private:
  uint64_t state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fgl
