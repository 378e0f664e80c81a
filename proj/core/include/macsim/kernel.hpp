#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "macsim/sim_time.hpp"

namespace macsim {

using NodeId = std::int32_t;

/// Event target used for channel bookkeeping events.
inline constexpr NodeId kMediumTarget = -1;

enum class EventKind : std::uint8_t {
  kArrival,
  kSlotTick,
  kTxEnd,
  kTimeout,
  kPauseExpiry,
  kDeferredTx,
  kGeneric,
};

std::string_view to_string(EventKind kind);

struct Event {
  SimTime fire_time{};
  std::uint64_t seq = 0;
  NodeId target = kMediumTarget;
  EventKind kind = EventKind::kGeneric;
};

/// Handle returned by Simulator::schedule; seq 0 never names an event.
class EventHandle {
 public:
  EventHandle() = default;
  explicit EventHandle(std::uint64_t seq) : seq_(seq) {}
  std::uint64_t seq() const { return seq_; }
  bool valid() const { return seq_ != 0; }

 private:
  std::uint64_t seq_ = 0;
};

/// An event popped from the queue together with its action.
struct Dispatchable {
  Event event;
  std::function<void()> action;
};

/// Single-threaded discrete-event kernel. Events are ordered by
/// (fire_time, seq); seq is assigned at scheduling time, so events at the
/// same instant run in the order they were scheduled. Cancellation is lazy.
class Simulator {
 public:
  using TraceHook = std::function<void(const Event&)>;

  SimTime now() const { return now_; }

  /// Throws SimulationFault if `at` lies before the current clock.
  EventHandle schedule(SimTime at, NodeId target, EventKind kind, std::function<void()> action);
  EventHandle schedule_in(Duration delay, NodeId target, EventKind kind,
                          std::function<void()> action) {
    return schedule(now_ + delay, target, kind, std::move(action));
  }

  /// Cancelling an already-fired or invalid handle is a no-op.
  void cancel(EventHandle& handle);

  /// Removes the next live event and advances the clock to it. Returns
  /// nullopt when nothing is pending (end of run).
  std::optional<Dispatchable> pop_next();

  /// Dispatches every event with fire_time <= end, then sets the clock to
  /// end. Returns the number of events dispatched.
  std::uint64_t run_until(SimTime end);

  std::size_t pending_count() const { return heap_.size() - cancelled_.size(); }
  std::uint64_t dispatched_count() const { return dispatched_; }

  void set_trace_hook(TraceHook hook) { trace_ = std::move(hook); }

 private:
  struct Entry {
    Event event;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.event.fire_time != b.event.fire_time) return a.event.fire_time > b.event.fire_time;
      return a.event.seq > b.event.seq;
    }
  };

  std::optional<Entry> pop_live();

  SimTime now_{};
  std::uint64_t next_seq_ = 1;
  std::uint64_t dispatched_ = 0;
  std::vector<Entry> heap_;
  std::unordered_set<std::uint64_t> cancelled_;
  std::vector<bool> done_ = {true};  // fired or cancelled, indexed by seq
  TraceHook trace_;
};

/// Writes `time_ns,seq,target,action` lines. target is a node id or "medium".
void write_trace_line(std::ostream& os, const Event& ev);

}  // namespace macsim
