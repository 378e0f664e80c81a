#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "macsim/sim_time.hpp"

namespace macsim {

/// Name recorded in run metadata; changing the engine or the seed mixing
/// changes every result.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64-seeded";

/// Per-node random purposes. Each (node, purpose) pair owns its own stream so
/// that, e.g., the urgent arrival times of a node do not depend on how many
/// backoff draws the MAC has made.
enum class StreamPurpose : std::uint32_t {
  kBackoff = 0,
  kUrgentArrivals = 1,
  kNormalArrivals = 2,
  kArrivalJitter = 3,
};

constexpr std::uint64_t stream_id(std::int32_t node, StreamPurpose purpose) {
  return static_cast<std::uint64_t>(node) * 16u + static_cast<std::uint32_t>(purpose);
}

std::uint64_t splitmix64(std::uint64_t& state);

/// Seeded substream of a master seed. The engine is std::mt19937_64, whose
/// output sequence is fixed by the standard; distributions are implemented
/// here rather than taken from <random>, since the standard leaves those
/// implementation-defined and they differ between library vendors.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t id() const { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Uniform integer on the closed range [lo, hi]; unbiased (rejection).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Exponential with the given mean, rounded to the nearest nanosecond.
  Duration exponential(Duration mean);

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

/// Inverse-CDF transform for an exponential law. `u` is clamped away from 1
/// so that the logarithm stays finite.
Duration exponential_from_uniform(double u, Duration mean);

}  // namespace macsim
