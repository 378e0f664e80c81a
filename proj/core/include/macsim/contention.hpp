#pragma once

#include <cstdint>
#include <map>

#include "macsim/medium.hpp"
#include "macsim/rng.hpp"

namespace macsim {

struct SlotRange {
  int lo = 0;
  int hi = 0;
};

/// Non-overlapping per-class contention windows. Defaults: urgent draws
/// from 0..10 slots, normal from 11..20.
struct ContentionConfig {
  std::map<Priority, SlotRange> window_by_priority{
      {Priority::kUrgent, {0, 10}},
      {Priority::kNormal, {11, 20}},
  };
  Duration slot_time = std::chrono::microseconds{320};
  int max_retries = 5;

  /// Throws ConfigError unless every range is well formed, the ranges are
  /// pairwise disjoint, and a more urgent class always draws smaller values.
  void validate() const;
  const SlotRange& window(Priority p) const;
};

/// Uniform slot count from the class's closed window.
int draw_backoff(const ContentionConfig& cfg, Priority priority, RngStream& rng);

/// Result of one backoff slot boundary.
enum class SlotAction : std::uint8_t {
  kFrozen,       // channel busy during the slot; counter unchanged
  kDecremented,  // idle slot consumed, more remain
  kTransmit,     // counter reached zero; start transmitting now
};

/// Counter update at a slot boundary. A busy slot freezes the counter; an
/// idle slot decrements it and a counter at zero means transmit.
SlotAction on_slot_tick(int& remaining_slots, ChannelState slot_state);

}  // namespace macsim
