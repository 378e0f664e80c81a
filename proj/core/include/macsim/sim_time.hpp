#pragma once

#include <chrono>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace macsim {

/// Virtual clock of a simulation run. Ticks are integer nanoseconds since
/// the run started; nothing in the simulator uses floating-point time.
struct SimClock {
  using rep = std::int64_t;
  using period = std::nano;
  using duration = std::chrono::duration<rep, period>;
  using time_point = std::chrono::time_point<SimClock>;
  static constexpr bool is_steady = true;
};

using Duration = SimClock::duration;
using SimTime = SimClock::time_point;

inline constexpr SimTime kSimStart{};

constexpr SimTime at(Duration since_start) { return SimTime{since_start}; }
constexpr std::int64_t to_ns(SimTime t) { return t.time_since_epoch().count(); }
constexpr std::int64_t to_ns(Duration d) { return d.count(); }

inline double to_ms(Duration d) { return static_cast<double>(d.count()) / 1e6; }
inline double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1e9; }

/// Programming fault inside a run (scheduling in the past, double delivery,
/// protocol state corruption). A run that throws this is discarded.
class SimulationFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Invalid user configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace macsim
