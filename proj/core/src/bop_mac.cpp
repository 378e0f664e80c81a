#include "macsim/bop_mac.hpp"

namespace macsim {

OutcomeAction on_data_outcome(BopNodeState& state, DataOutcome outcome, const ContentionConfig& cfg,
                              RngStream& rng) {
  if (!state.current) throw SimulationFault("data outcome without a current packet");
  if (outcome == DataOutcome::kAckReceived) {
    state = BopNodeState{};
    return OutcomeAction::kDelivered;
  }
  ++state.retry_count;
  if (state.retry_count > cfg.max_retries) {
    state = BopNodeState{};
    return OutcomeAction::kDrop;
  }
  state.phase = BopPhase::kBackoff;
  state.remaining_slots = draw_backoff(cfg, state.current->priority, rng);
  return OutcomeAction::kRetry;
}

BopNode::BopNode(NodeId id, Simulator& sim, Medium& medium, const BopConfig& cfg,
                 RunMetrics& metrics, std::uint64_t master_seed, std::size_t queue_capacity)
    : MacNode(id, sim, medium, cfg.contention, metrics, master_seed, queue_capacity), cfg_(cfg) {}

void BopNode::on_new_packet(const Packet&) {
  if (state_.phase == BopPhase::kIdle) try_start();
}

void BopNode::try_start() {
  const Packet* next = queues_.select_next();
  if (!next) {
    state_ = BopNodeState{};
    return;
  }
  state_.current = *next;
  state_.retry_count = 0;
  state_.phase = BopPhase::kBackoff;
  begin_contention(next->priority, next->id);
}

void BopNode::on_backoff_expired() {
  state_.remaining_slots = 0;
  if (!cfg_.rts_cts) {
    send_data();
    return;
  }
  const auto& p = *state_.current;
  Frame rts{FrameKind::kRts, frame_size::kRts, id_, kSinkId, p.id};
  rts.priority = p.priority;
  rts.reserved_until = sim_.now() + airtime(frame_size::kRts) + airtime(frame_size::kCts);
  state_.phase = BopPhase::kAwaitingCts;
  medium_.begin_transmission(id_, rts);
}

void BopNode::send_data() {
  const auto& p = *state_.current;
  Frame data{FrameKind::kData, frame_size::kData, id_, kSinkId, p.id};
  data.priority = p.priority;
  data.reserved_until = sim_.now() + airtime(frame_size::kData) + airtime(frame_size::kAck);
  state_.phase = BopPhase::kTransmitting;
  medium_.begin_transmission(id_, data);
}

void BopNode::arm_timeout(Duration after) {
  sim_.cancel(timeout_);
  timeout_ = sim_.schedule_in(after, id_, EventKind::kTimeout, [this] {
    timeout_ = EventHandle{};
    on_timeout();
  });
}

void BopNode::on_transmit_end(const Frame& frame) {
  if (frame.kind == FrameKind::kData) {
    state_.phase = BopPhase::kAwaitingAck;
    arm_timeout(airtime(frame_size::kAck) + 2 * slot());
  } else if (frame.kind == FrameKind::kRts) {
    arm_timeout(airtime(frame_size::kCts) + 2 * slot());
  }
}

void BopNode::handle_frame(const Frame& frame, SimTime) {
  if (frame.dst != id_ || !state_.current || frame.packet_id != state_.current->id) return;
  if (frame.kind == FrameKind::kCts && state_.phase == BopPhase::kAwaitingCts) {
    sim_.cancel(timeout_);
    send_data();
  } else if (frame.kind == FrameKind::kAck && state_.phase == BopPhase::kAwaitingAck) {
    sim_.cancel(timeout_);
    const Packet p = *state_.current;
    apply(on_data_outcome(state_, DataOutcome::kAckReceived, contention_, backoff_rng_));
    deliver(p, sim_.now());
    queues_.complete(p.priority);
    try_start();
  }
}

void BopNode::on_timeout() {
  // A missing CTS is handled like a missing ACK: nothing reached the sink.
  const Priority prio = state_.current->priority;
  apply(on_data_outcome(state_, DataOutcome::kAckTimeout, contention_, backoff_rng_));
  if (state_.phase == BopPhase::kIdle) {
    drop_head(prio, DropReason::kRetryLimit);
    try_start();
  }
}

void BopNode::apply(OutcomeAction action) {
  if (action != OutcomeAction::kRetry) return;
  note_draw(state_.current->priority, state_.current->id, state_.remaining_slots);
  start_backoff(state_.remaining_slots);
}

BopSink::BopSink(Simulator& sim, Medium& medium, const BopConfig& cfg)
    : sim_(sim), medium_(medium), cfg_(cfg) {}

void BopSink::on_transmit_end(const Frame&) {}

void BopSink::on_receive(const Frame& frame, SimTime) {
  if (frame.dst != kSinkId) return;
  const SimTime now = sim_.now();
  if (frame.kind == FrameKind::kData) {
    // Duplicates (lost ACK) are acknowledged again.
    Frame ack{FrameKind::kAck, frame_size::kAck, kSinkId, frame.src, frame.packet_id};
    ack.priority = frame.priority;
    ack.reserved_until = now + medium_.airtime(frame_size::kAck);
    medium_.begin_transmission(kSinkId, ack);
  } else if (frame.kind == FrameKind::kRts && cfg_.rts_cts) {
    Frame cts{FrameKind::kCts, frame_size::kCts, kSinkId, frame.src, frame.packet_id};
    cts.priority = frame.priority;
    cts.reserved_until = now + medium_.airtime(frame_size::kCts) + medium_.airtime(frame_size::kData) +
                         medium_.airtime(frame_size::kAck);
    medium_.begin_transmission(kSinkId, cts);
  }
}

}  // namespace macsim
