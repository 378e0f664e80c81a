#include "macsim/contention.hpp"

#include <string>

namespace macsim {

void ContentionConfig::validate() const {
  if (slot_time <= Duration::zero()) throw ConfigError("slot_time must be positive");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (window_by_priority.empty()) throw ConfigError("no contention windows configured");
  const SlotRange* prev = nullptr;
  for (const auto& [prio, range] : window_by_priority) {
    if (range.lo < 0 || range.hi < range.lo) {
      throw ConfigError("contention window for " + std::string(to_string(prio)) + " is malformed");
    }
    // std::map iterates from most to least urgent.
    if (prev && range.lo <= prev->hi) {
      throw ConfigError("contention windows must be disjoint and ordered by urgency");
    }
    prev = &range;
  }
}

const SlotRange& ContentionConfig::window(Priority p) const {
  auto it = window_by_priority.find(p);
  if (it == window_by_priority.end()) {
    throw ConfigError("no contention window for class " + std::string(to_string(p)));
  }
  return it->second;
}

int draw_backoff(const ContentionConfig& cfg, Priority priority, RngStream& rng) {
  const auto& w = cfg.window(priority);
  return static_cast<int>(rng.uniform_int(w.lo, w.hi));
}

SlotAction on_slot_tick(int& remaining_slots, ChannelState slot_state) {
  if (slot_state == ChannelState::kBusy) return SlotAction::kFrozen;
  if (remaining_slots > 0) --remaining_slots;
  return remaining_slots == 0 ? SlotAction::kTransmit : SlotAction::kDecremented;
}

}  // namespace macsim
