#pragma once

#include <array>
#include <cstdint>

namespace cstree {

/// Deterministic, platform-independent random generator (xoshiro256++),
/// seeded through a splitmix64 expansion. All randomness in the project
/// flows through this type so that equal seeds give bit-identical output
/// regardless of standard-library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller; the spare deviate is cached.
  double normal();

  /// Uniform on {-1, +1}.
  double rademacher();

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);

 private:
  std::array<std::uint64_t, 4> state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Purpose tags for stream splitting. Teacher and student draws never share
/// a stream: each consumer derives its generator from
/// (master seed, node id, purpose).
enum class StreamPurpose : std::uint32_t {
  class_random = 1,   // random part R of a class matrix
  coefficients = 2,   // training coefficients z
  solver_init = 3,    // solver/factorization initialization
  designated = 4,     // designated solution x
  matrix = 5,         // problem matrix A
  experiment = 6,     // experiment-level draws
  generic = 7,
};

/// Stream-splitting rule: the derived seed is
/// mix(master_seed) ^ mix(node_id * 2^8 + purpose), with mix the splitmix64
/// finalizer. Distinct (node, purpose) pairs give independent streams for
/// the same master seed.
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t node_id,
                                 StreamPurpose purpose);

Rng split_stream(std::uint64_t master_seed, std::uint64_t node_id, StreamPurpose purpose);

}  // namespace cstree
