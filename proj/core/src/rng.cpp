#include "macsim/rng.hpp"

#include <cmath>
#include <limits>

namespace macsim {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master;
  const std::uint64_t a = splitmix64(s);
  s = a ^ (stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL);
  splitmix64(s);
  return splitmix64(s);
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id), engine_(mix_seed(master_seed, stream_id)) {}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi) {
  if (hi < lo) throw ConfigError("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1u;
  if (span == 0) return static_cast<std::int64_t>(engine_());  // full 64-bit range
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % span) - 1u;
  std::uint64_t x = engine_();
  while (x > limit) x = engine_();
  return lo + static_cast<std::int64_t>(x % span);
}

Duration RngStream::exponential(Duration mean) { return exponential_from_uniform(uniform01(), mean); }

Duration exponential_from_uniform(double u, Duration mean) {
  constexpr double kTiny = 0x1.0p-53;
  double tail = 1.0 - u;
  if (!(tail >= kTiny)) tail = kTiny;
  const double x = -std::log(tail) * static_cast<double>(mean.count());
  return Duration{static_cast<Duration::rep>(std::llround(x))};
}

}  // namespace macsim
