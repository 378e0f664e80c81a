#include "macsim/mac_node.hpp"

#include <algorithm>

namespace macsim {

MacNode::MacNode(NodeId id, Simulator& sim, Medium& medium, const ContentionConfig& contention,
                 RunMetrics& metrics, std::uint64_t master_seed, std::size_t queue_capacity)
    : id_(id),
      sim_(sim),
      medium_(medium),
      contention_(contention),
      metrics_(metrics),
      backoff_rng_(master_seed, stream_id(id, StreamPurpose::kBackoff)),
      queues_(queue_capacity) {}

void MacNode::on_packet_arrival(const Packet& p) {
  metrics_.record_generated(p);
  if (!queues_.enqueue(p)) {
    metrics_.record_drop(p, DropReason::kQueueFull);
    return;
  }
  on_new_packet(p);
}

void MacNode::on_receive(const Frame& frame, SimTime started) {
  // The most recent intact frame carries the freshest view of the exchange,
  // including early termination (e.g. an urgent takeover shortening a burst).
  nav_ = frame.reserved_until;
  // A frozen counter waiting on a reservation that just got shorter resumes
  // on the new grid.
  if (tick_.valid()) {
    const SimTime resume = busy_until() + slot();
    if (resume > sim_.now() && tick_at_ > resume) {
      sim_.cancel(tick_);
      schedule_tick(resume);
    }
  }
  handle_frame(frame, started);
}

SimTime MacNode::busy_until() const { return std::max(medium_.detectable_busy_until(), nav_); }

ChannelState MacNode::slot_state() const {
  return busy_until() > sim_.now() - slot() ? ChannelState::kBusy : ChannelState::kIdle;
}

void MacNode::begin_contention(Priority priority, std::uint64_t packet_id) {
  const int slots = draw_backoff(contention_, priority, backoff_rng_);
  note_draw(priority, packet_id, slots);
  start_backoff(slots);
}

void MacNode::note_draw(Priority priority, std::uint64_t packet_id, int slots) {
  if (backoff_log_) backoff_log_->push_back(BackoffDraw{id_, packet_id, priority, slots, sim_.now()});
}

void MacNode::start_backoff(int slots) {
  stop_backoff();
  remaining_slots_ = slots;
  const SimTime now = sim_.now();
  const SimTime busy = busy_until();
  if (busy > now) {
    schedule_tick(busy + slot());
    return;
  }
  if (slots == 0) {
    on_backoff_expired();
    return;
  }
  schedule_tick(now + slot());
}

void MacNode::stop_backoff() { sim_.cancel(tick_); }

void MacNode::schedule_tick(SimTime at) {
  tick_at_ = at;
  tick_ = sim_.schedule(at, id_, EventKind::kSlotTick, [this] { on_tick(); });
}

void MacNode::on_tick() {
  tick_ = EventHandle{};
  switch (on_slot_tick(remaining_slots_, slot_state())) {
    case SlotAction::kFrozen:
      schedule_tick(busy_until() + slot());
      break;
    case SlotAction::kDecremented:
      schedule_tick(sim_.now() + slot());
      break;
    case SlotAction::kTransmit:
      on_backoff_expired();
      break;
  }
}

void MacNode::deliver(const Packet& p, SimTime at) { metrics_.record_delivery(p, at); }

void MacNode::drop_head(Priority p, DropReason reason) {
  const Packet dropped = queues_.complete(p);
  metrics_.record_drop(dropped, reason);
}

}  // namespace macsim
