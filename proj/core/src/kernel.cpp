#include "macsim/kernel.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

namespace macsim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kArrival: return "arrival";
    case EventKind::kSlotTick: return "slot_tick";
    case EventKind::kTxEnd: return "tx_end";
    case EventKind::kTimeout: return "timeout";
    case EventKind::kPauseExpiry: return "pause_expiry";
    case EventKind::kDeferredTx: return "deferred_tx";
    case EventKind::kGeneric: return "generic";
  }
  return "unknown";
}

EventHandle Simulator::schedule(SimTime at, NodeId target, EventKind kind,
                                std::function<void()> action) {
  if (at < now_) {
    std::ostringstream msg;
    msg << "event scheduled in the past: fire_time=" << to_ns(at) << "ns clock=" << to_ns(now_)
        << "ns action=" << to_string(kind) << " target=" << target;
    throw SimulationFault(msg.str());
  }
  const std::uint64_t seq = next_seq_++;
  done_.push_back(false);
  heap_.push_back(Entry{Event{at, seq, target, kind}, std::move(action)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return EventHandle{seq};
}

void Simulator::cancel(EventHandle& handle) {
  if (!handle.valid()) return;
  const auto seq = handle.seq();
  if (seq < next_seq_ && !done_[seq]) {
    done_[seq] = true;
    cancelled_.insert(seq);
  }
  handle = EventHandle{};
}

std::optional<Simulator::Entry> Simulator::pop_live() {
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    auto e = std::make_optional(std::move(heap_.back()));
    heap_.pop_back();
    if (auto it = cancelled_.find(e->event.seq); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    done_[e->event.seq] = true;
    return e;
  }
  return std::nullopt;
}

std::optional<Dispatchable> Simulator::pop_next() {
  auto e = pop_live();
  if (!e) return std::nullopt;
  now_ = e->event.fire_time;
  return Dispatchable{e->event, std::move(e->action)};
}

std::uint64_t Simulator::run_until(SimTime end) {
  if (end < now_) throw SimulationFault("run_until: end lies before the current clock");
  std::uint64_t count = 0;
  while (true) {
    auto e = pop_live();
    if (!e) break;
    if (e->event.fire_time > end) {
      // Put it back untouched; seq keeps its place in the order.
      done_[e->event.seq] = false;
      heap_.push_back(std::move(*e));
      std::push_heap(heap_.begin(), heap_.end(), Later{});
      break;
    }
    now_ = e->event.fire_time;
    if (trace_) trace_(e->event);
    ++count;
    ++dispatched_;
    if (e->action) e->action();
  }
  now_ = end;
  return count;
}

void write_trace_line(std::ostream& os, const Event& ev) {
  os << to_ns(ev.fire_time) << ',' << ev.seq << ',';
  if (ev.target == kMediumTarget) {
    os << "medium";
  } else {
    os << ev.target;
  }
  os << ',' << to_string(ev.kind) << '\n';
}

}  // namespace macsim
