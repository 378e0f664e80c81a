#include "macsim/frog_mac.hpp"

#include <algorithm>

namespace macsim {

// ---------------------------------------------------------------------------
// Fragmentation arithmetic

int fragment_count(std::uint32_t payload_len, std::uint32_t fragment_payload) {
  if (fragment_payload < 1) throw ConfigError("fragment_payload must be at least 1 byte");
  if (payload_len < 1) throw ConfigError("payload_len must be at least 1 byte");
  return static_cast<int>((payload_len + fragment_payload - 1) / fragment_payload);
}

std::uint32_t frag_frame_size(std::uint32_t fragment_payload, bool is_last, std::uint32_t payload_len,
                              std::uint32_t header) {
  if (fragment_payload < 1) throw ConfigError("fragment_payload must be at least 1 byte");
  if (!is_last) return std::min(fragment_payload, payload_len) + header;
  const std::uint32_t rem = payload_len % fragment_payload;
  return (rem == 0 ? fragment_payload : rem) + header;
}

std::uint32_t fragment_share(std::uint32_t payload_len, std::uint32_t fragment_payload, int index) {
  const int total = fragment_count(payload_len, fragment_payload);
  if (index < 0 || index >= total) throw SimulationFault("fragment index out of range");
  if (index < total - 1) return fragment_payload;
  return payload_len - fragment_payload * static_cast<std::uint32_t>(total - 1);
}

void FrogConfig::validate(const PhyConfig& phy) const {
  if (fragment_payload < 2 || fragment_payload > frame_size::kPayload) {
    throw ConfigError("fragment_payload must be in [2, 121], got " + std::to_string(fragment_payload));
  }
  if (t_int <= tx_duration(phy, frame_size::kRts)) {
    throw ConfigError("t_int must exceed the airtime of an RTS");
  }
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  contention.validate();
}

FragmentPlan::FragmentPlan(const Packet& p, std::uint32_t fragment_payload)
    : packet_id(p.id),
      payload_len(p.payload_len),
      total(fragment_count(p.payload_len, fragment_payload)),
      sent(static_cast<std::size_t>(total), false) {}

Duration burst_remaining(const PhyConfig& phy, const FrogConfig& cfg, std::uint32_t payload_len,
                         int from_index) {
  const int total = fragment_count(payload_len, cfg.fragment_payload);
  Duration d = tx_duration(phy, frame_size::kSack);
  for (int i = std::max(from_index, 0); i < total; ++i) {
    d += tx_duration(phy, frag_frame_size(cfg.fragment_payload, i == total - 1, payload_len, cfg.frag_header));
    if (i < total - 1) d += cfg.t_int;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Reassembly

std::vector<std::vector<std::uint8_t>> split_payload(std::span<const std::uint8_t> payload,
                                                     std::uint32_t fragment_payload) {
  const int total = fragment_count(static_cast<std::uint32_t>(payload.size()), fragment_payload);
  std::vector<std::vector<std::uint8_t>> out;
  out.reserve(static_cast<std::size_t>(total));
  for (std::size_t off = 0; off < payload.size(); off += fragment_payload) {
    const auto n = std::min<std::size_t>(fragment_payload, payload.size() - off);
    out.emplace_back(payload.begin() + off, payload.begin() + off + n);
  }
  return out;
}

bool SinkReassembly::add(Key key, int index, int total, SimTime now, std::span<const std::uint8_t> data,
                         std::uint32_t fragment_payload) {
  if (total < 1 || index < 0 || index >= total) throw SimulationFault("reassembly: bad fragment index");
  auto [it, inserted] = entries_.try_emplace(key);
  Entry& e = it->second;
  if (inserted) {
    e.total = total;
    e.fragment_payload = fragment_payload;
    e.have.assign(static_cast<std::size_t>(total), false);
    e.chunks.resize(static_cast<std::size_t>(total));
    e.first_arrival = now;
  } else if (e.total != total) {
    throw SimulationFault("reassembly: fragment total changed mid-packet");
  }
  if (e.have[index]) return false;
  e.have[index] = true;
  if (!data.empty()) e.chunks[index].assign(data.begin(), data.end());
  return true;
}

const SinkReassembly::Entry* SinkReassembly::find(Key key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

bool SinkReassembly::complete(Key key) const {
  const Entry* e = find(key);
  return e && std::all_of(e->have.begin(), e->have.end(), [](bool b) { return b; });
}

int SinkReassembly::lowest_missing(Key key) const {
  const Entry* e = find(key);
  if (!e) return 0;
  auto it = std::find(e->have.begin(), e->have.end(), false);
  return static_cast<int>(it - e->have.begin());
}

std::vector<int> SinkReassembly::missing(Key key) const {
  std::vector<int> out;
  if (const Entry* e = find(key)) {
    for (int i = 0; i < e->total; ++i) {
      if (!e->have[i]) out.push_back(i);
    }
  }
  return out;
}

int SinkReassembly::received_count(Key key) const {
  const Entry* e = find(key);
  return e ? static_cast<int>(std::count(e->have.begin(), e->have.end(), true)) : 0;
}

std::optional<std::vector<std::uint8_t>> SinkReassembly::reassemble(Key key) const {
  if (!complete(key)) return std::nullopt;
  const Entry* e = find(key);
  std::vector<std::uint8_t> out;
  for (const auto& chunk : e->chunks) {
    if (chunk.empty()) return std::nullopt;
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  return out;
}

std::optional<SimTime> SinkReassembly::mark_completed(Key key, SimTime now) {
  if (!complete(key)) return std::nullopt;
  Entry& e = entries_.at(key);
  if (!e.completed_at) e.completed_at = now;
  return e.completed_at;
}

// ---------------------------------------------------------------------------
// Sink logic

std::vector<Frame> FrogSinkLogic::on_frame(const Frame& frame, SimTime started, SimTime ended) {
  if (frame.dst != kSinkId) return {};
  switch (frame.kind) {
    case FrameKind::kRts: return on_rts(frame, started, ended);
    case FrameKind::kFrag: return on_fragment(frame, ended);
    case FrameKind::kData: return on_data(frame, ended);
    default: return {};
  }
}

std::vector<Frame> FrogSinkLogic::on_rts(const Frame& f, SimTime started, SimTime ended) {
  Frame cts{FrameKind::kCts, frame_size::kCts, kSinkId, f.src, f.packet_id};
  cts.priority = f.priority;
  cts.fragment_cursor = f.fragment_cursor;
  const Duration slot = cfg_.contention.slot_time;

  if (in_exchange(ended)) {
    // Mid-burst, only an urgent RTS that fits inside the open pause is granted.
    const bool claims_pause = paused_ && f.priority == Priority::kUrgent &&
                              started >= paused_->pause_opens && ended <= paused_->pause_closes;
    if (!claims_pause) return {};
    interrupted_ = paused_;
    paused_.reset();
    exchange_ = Exchange{f.src, Priority::kUrgent, ended + air(frame_size::kCts) + slot};
    cts.reserved_until = ended + air(frame_size::kCts) + air(frame_size::kData) + air(frame_size::kAck) +
                         air(frame_size::kAckPFrag);
    return {cts};
  }

  paused_.reset();
  interrupted_.reset();
  exchange_ = Exchange{f.src, f.priority, ended + air(frame_size::kCts) + slot};
  // The requester advertises the length of its exchange; echo it.
  cts.reserved_until = std::max(f.reserved_until, ended + air(frame_size::kCts));
  return {cts};
}

std::vector<Frame> FrogSinkLogic::on_fragment(const Frame& f, SimTime ended) {
  const SinkReassembly::Key key{f.src, f.packet_id};
  const int index = *f.frag_index;
  const int total = *f.frag_total;
  reassembly_.add(key, index, total, ended);
  const Duration slot = cfg_.contention.slot_time;

  if (index < total - 1) {
    paused_ = Burst{f.src, f.packet_id, ended, ended + cfg_.t_int};
    exchange_ = Exchange{f.src, Priority::kNormal, ended + cfg_.t_int + slot};
    return {};
  }

  paused_.reset();
  if (auto done = reassembly_.mark_completed(key, ended)) {
    Frame sack{FrameKind::kSack, frame_size::kSack, kSinkId, f.src, f.packet_id};
    sack.completed_at = *done;
    sack.reserved_until = ended + air(frame_size::kSack);
    exchange_.reset();
    return {sack};
  }

  const int cursor = reassembly_.lowest_missing(key);
  // The last fragment reveals the payload length.
  const std::uint32_t payload_len =
      static_cast<std::uint32_t>(total - 1) * cfg_.fragment_payload + (f.size_bytes - cfg_.frag_header);
  Frame nack{FrameKind::kNack, frame_size::kNack, kSinkId, f.src, f.packet_id};
  nack.fragment_cursor = static_cast<std::uint16_t>(cursor);
  nack.reserved_until = ended + air(frame_size::kNack) + burst_remaining(phy_, cfg_, payload_len, cursor);
  exchange_ = Exchange{f.src, Priority::kNormal, ended + air(frame_size::kNack) + slot};
  return {nack};
}

std::vector<Frame> FrogSinkLogic::on_data(const Frame& f, SimTime ended) {
  std::vector<Frame> out;
  Frame ack{FrameKind::kAck, frame_size::kAck, kSinkId, f.src, f.packet_id};
  ack.priority = f.priority;
  ack.reserved_until = ended + air(frame_size::kAck);
  if (interrupted_) ack.reserved_until += air(frame_size::kAckPFrag);
  out.push_back(ack);

  if (interrupted_) {
    const SinkReassembly::Key key{interrupted_->owner, interrupted_->packet_id};
    Frame apf{FrameKind::kAckPFrag, frame_size::kAckPFrag, kSinkId, interrupted_->owner,
              interrupted_->packet_id};
    apf.priority = Priority::kNormal;
    apf.fragment_cursor = static_cast<std::uint16_t>(reassembly_.lowest_missing(key));
    apf.reserved_until = ack.reserved_until;
    out.push_back(apf);
    interrupted_.reset();
  }
  exchange_.reset();
  paused_.reset();
  return out;
}

FrogSink::FrogSink(Simulator& sim, Medium& medium, const FrogConfig& cfg)
    : sim_(sim), medium_(medium), logic_(medium.phy(), cfg) {}

void FrogSink::on_receive(const Frame& frame, SimTime started) {
  auto responses = logic_.on_frame(frame, started, sim_.now());
  if (responses.empty()) return;
  outbox_.erase(outbox_.begin(), outbox_.begin() + static_cast<std::ptrdiff_t>(outbox_pos_));
  outbox_pos_ = 0;
  outbox_.insert(outbox_.end(), responses.begin(), responses.end());
  if (!medium_.is_transmitting(kSinkId)) send_next();
}

void FrogSink::on_transmit_end(const Frame&) { send_next(); }

void FrogSink::send_next() {
  if (outbox_pos_ >= outbox_.size()) return;
  medium_.begin_transmission(kSinkId, outbox_[outbox_pos_++]);
}

// ---------------------------------------------------------------------------
// Sender

std::string_view to_string(FrogPhase phase) {
  switch (phase) {
    case FrogPhase::kIdle: return "idle";
    case FrogPhase::kBackoff: return "backoff";
    case FrogPhase::kPauseRtsPending: return "pause_rts_pending";
    case FrogPhase::kWaitCts: return "wait_cts";
    case FrogPhase::kSendingData: return "sending_data";
    case FrogPhase::kWaitAck: return "wait_ack";
    case FrogPhase::kSendingFrag: return "sending_frag";
    case FrogPhase::kPause: return "pause";
    case FrogPhase::kWaitSack: return "wait_sack";
    case FrogPhase::kYielded: return "yielded";
  }
  return "unknown";
}

FrogNode::FrogNode(NodeId id, Simulator& sim, Medium& medium, const FrogConfig& cfg,
                   const PhyConfig& phy, RunMetrics& metrics, std::uint64_t master_seed,
                   std::size_t queue_capacity)
    : MacNode(id, sim, medium, cfg.contention, metrics, master_seed, queue_capacity),
      cfg_(cfg),
      phy_(phy) {}

const Packet& FrogNode::active_packet() const {
  const Packet* p = active_ ? queues_.head(*active_) : nullptr;
  if (!p) throw SimulationFault("FROG node " + std::to_string(id_) + " has no active packet");
  return *p;
}

void FrogNode::on_new_packet(const Packet& p) {
  if (p.priority == Priority::kUrgent && pause_ && sim_.now() < pause_->closes) {
    on_pause_opportunity(*pause_);
    if (phase_ == FrogPhase::kPauseRtsPending) return;
  }
  if (phase_ == FrogPhase::kIdle) try_start();
}

void FrogNode::try_start() {
  if (phase_ != FrogPhase::kIdle) return;
  active_.reset();
  pause_claim_ = false;
  if (queues_.head(Priority::kUrgent)) {
    contend(Priority::kUrgent);
  } else if (const Packet* n = queues_.head(Priority::kNormal)) {
    if (!plan_ || plan_->packet_id != n->id) plan_ = FragmentPlan(*n, cfg_.fragment_payload);
    contend(Priority::kNormal);
  }
}

void FrogNode::contend(Priority priority) {
  active_ = priority;
  phase_ = FrogPhase::kBackoff;
  begin_contention(priority, active_packet().id);
}

void FrogNode::on_backoff_expired() { send_rts(); }

void FrogNode::send_rts() {
  const Packet& p = active_packet();
  Frame rts{FrameKind::kRts, frame_size::kRts, id_, kSinkId, p.id};
  rts.priority = *active_;
  const SimTime granted_at = sim_.now() + airtime(frame_size::kRts) + airtime(frame_size::kCts);
  if (*active_ == Priority::kUrgent) {
    rts.reserved_until = granted_at + airtime(frame_size::kData) + airtime(frame_size::kAck);
    if (pause_claim_) rts.reserved_until += airtime(frame_size::kAckPFrag);
  } else {
    rts.fragment_cursor = static_cast<std::uint16_t>(plan_->next_index);
    rts.reserved_until = granted_at + burst_remaining(phy_, cfg_, p.payload_len, plan_->next_index);
  }
  phase_ = FrogPhase::kWaitCts;
  medium_.begin_transmission(id_, rts);
}

void FrogNode::send_data() {
  const Packet& p = active_packet();
  Frame data{FrameKind::kData, frame_size::kData, id_, kSinkId, p.id};
  data.priority = Priority::kUrgent;
  data.reserved_until = sim_.now() + airtime(frame_size::kData) + airtime(frame_size::kAck);
  if (pause_claim_) data.reserved_until += airtime(frame_size::kAckPFrag);
  phase_ = FrogPhase::kSendingData;
  medium_.begin_transmission(id_, data);
}

void FrogNode::send_fragment() {
  active_ = Priority::kNormal;
  const Packet& p = active_packet();
  const int index = plan_->next_index;
  const bool last = index == plan_->total - 1;
  Frame frag{FrameKind::kFrag, frag_frame_size(cfg_.fragment_payload, last, p.payload_len, cfg_.frag_header),
             id_, kSinkId, p.id};
  frag.frag_index = static_cast<std::uint16_t>(index);
  frag.frag_total = static_cast<std::uint16_t>(plan_->total);
  frag.priority = Priority::kNormal;
  frag.reserved_until = sim_.now() + burst_remaining(phy_, cfg_, p.payload_len, index);
  phase_ = FrogPhase::kSendingFrag;
  medium_.begin_transmission(id_, frag);
}

void FrogNode::arm_timeout(Duration after) {
  sim_.cancel(timeout_);
  timeout_ = sim_.schedule_in(after, id_, EventKind::kTimeout, [this] {
    timeout_ = EventHandle{};
    on_timeout();
  });
}

void FrogNode::on_transmit_end(const Frame& frame) {
  switch (frame.kind) {
    case FrameKind::kRts:
      if (phase_ == FrogPhase::kWaitCts) arm_timeout(airtime(frame_size::kCts) + 2 * slot());
      break;
    case FrameKind::kData:
      phase_ = FrogPhase::kWaitAck;
      arm_timeout(airtime(frame_size::kAck) + 2 * slot());
      break;
    case FrameKind::kFrag: {
      const int index = *frame.frag_index;
      plan_->sent[index] = true;
      ++counters_.fragments_sent;
      if (index == plan_->total - 1) {
        phase_ = FrogPhase::kWaitSack;
        arm_timeout(airtime(frame_size::kSack) + 2 * slot());
        break;
      }
      plan_->next_index = index + 1;
      phase_ = FrogPhase::kPause;
      yield_ = false;
      ++counters_.pauses;
      const SimTime closes = sim_.now() + cfg_.t_int;
      pause_timer_ = sim_.schedule(closes, id_, EventKind::kPauseExpiry, [this] {
        pause_timer_ = EventHandle{};
        on_pause_expired();
      });
      on_pause_opportunity(PauseWindow{id_, closes});
      break;
    }
    default:
      break;
  }
}

void FrogNode::handle_frame(const Frame& frame, SimTime) {
  if (frame.dst != id_) {
    if (frame.kind == FrameKind::kFrag && *frame.frag_index + 1 < *frame.frag_total) {
      on_pause_opportunity(PauseWindow{frame.src, sim_.now() + cfg_.t_int});
      return;
    }
    pause_.reset();
    if (frame.kind == FrameKind::kRts && frame.priority == Priority::kUrgent && phase_ == FrogPhase::kPause) {
      yield_ = true;
    }
    return;
  }

  switch (frame.kind) {
    case FrameKind::kCts:
      if (phase_ != FrogPhase::kWaitCts || frame.packet_id != active_packet().id) return;
      sim_.cancel(timeout_);
      if (*active_ == Priority::kUrgent) {
        send_data();
      } else {
        send_fragment();
      }
      break;
    case FrameKind::kAck: {
      if (phase_ != FrogPhase::kWaitAck || frame.packet_id != active_packet().id) return;
      sim_.cancel(timeout_);
      const Packet p = queues_.complete(Priority::kUrgent);
      deliver(p, sim_.now());
      urgent_retries_ = 0;
      pause_skip_ = 0;
      finish_transaction();
      break;
    }
    case FrameKind::kSack: {
      if (phase_ != FrogPhase::kWaitSack || !plan_ || frame.packet_id != plan_->packet_id) return;
      sim_.cancel(timeout_);
      const Packet p = queues_.complete(Priority::kNormal);
      deliver(p, frame.completed_at);
      plan_.reset();
      normal_retries_ = 0;
      finish_transaction();
      break;
    }
    case FrameKind::kNack:
      if (phase_ != FrogPhase::kWaitSack || !plan_ || frame.packet_id != plan_->packet_id) return;
      sim_.cancel(timeout_);
      ++counters_.nacks;
      if (!count_retry(Priority::kNormal)) return;
      plan_->next_index = frame.fragment_cursor;
      send_fragment();
      break;
    case FrameKind::kAckPFrag:
      if (!plan_ || frame.packet_id != plan_->packet_id) return;
      plan_->next_index = std::min<int>(frame.fragment_cursor, plan_->total - 1);
      if (phase_ != FrogPhase::kYielded) return;
      sim_.cancel(timeout_);
      phase_ = FrogPhase::kIdle;
      if (!cfg_.recontend_after_interrupt && !queues_.head(Priority::kUrgent)) {
        send_fragment();
      } else {
        try_start();
      }
      break;
    default:
      break;
  }
}

void FrogNode::on_pause_opportunity(const PauseWindow& window) {
  pause_ = window;
  if (!queues_.head(Priority::kUrgent)) return;
  const bool own_pause = phase_ == FrogPhase::kPause && window.owner == id_;
  if (!own_pause && phase_ != FrogPhase::kIdle && phase_ != FrogPhase::kBackoff) return;
  if (pause_skip_ > 0) {
    --pause_skip_;
    return;
  }
  const SimTime rts_at = sim_.now() + slot();
  if (rts_at + airtime(frame_size::kRts) > window.closes) return;
  claim_pause(window, rts_at);
}

void FrogNode::claim_pause(const PauseWindow& window, SimTime rts_at) {
  stop_backoff();
  if (phase_ == FrogPhase::kPause) sim_.cancel(pause_timer_);
  pause_ = window;
  active_ = Priority::kUrgent;
  pause_claim_ = true;
  phase_ = FrogPhase::kPauseRtsPending;
  pause_rts_ = sim_.schedule(rts_at, id_, EventKind::kDeferredTx, [this] {
    pause_rts_ = EventHandle{};
    send_pause_rts();
  });
}

void FrogNode::send_pause_rts() {
  if (medium_.detectable_busy_until() > sim_.now()) {
    // Someone else claimed this pause first.
    pause_claim_ = false;
    if (pause_ && pause_->owner == id_ && sim_.now() < pause_->closes) {
      active_ = Priority::kNormal;
      phase_ = FrogPhase::kPause;
      yield_ = false;
      pause_timer_ = sim_.schedule(pause_->closes, id_, EventKind::kPauseExpiry, [this] {
        pause_timer_ = EventHandle{};
        on_pause_expired();
      });
      return;
    }
    phase_ = FrogPhase::kBackoff;
    begin_contention(Priority::kUrgent, active_packet().id);
    return;
  }
  ++counters_.pause_rts_sent;
  send_rts();
}

void FrogNode::on_pause_expired() {
  if (phase_ != FrogPhase::kPause) return;
  pause_.reset();
  if (yield_) {
    yield_ = false;
    ++counters_.yields;
    phase_ = FrogPhase::kYielded;
    arm_timeout(airtime(frame_size::kCts) + airtime(frame_size::kData) + airtime(frame_size::kAck) +
                airtime(frame_size::kAckPFrag) + 2 * slot());
    return;
  }
  send_fragment();
}

void FrogNode::on_timeout() {
  switch (phase_) {
    case FrogPhase::kWaitCts:
    case FrogPhase::kWaitAck:
    case FrogPhase::kWaitSack:
      fail_attempt();
      break;
    case FrogPhase::kYielded:
      // The urgent exchange never closed with ACK_P_FRAG; start over from
      // the current cursor, the sink discards duplicates.
      phase_ = FrogPhase::kIdle;
      try_start();
      break;
    default:
      throw SimulationFault("FROG timeout in phase " + std::string(to_string(phase_)));
  }
}

bool FrogNode::count_retry(Priority prio) {
  int& retries = prio == Priority::kUrgent ? urgent_retries_ : normal_retries_;
  if (++retries <= cfg_.max_retries) return true;
  drop_head(prio, DropReason::kRetryLimit);
  retries = 0;
  if (prio == Priority::kNormal) plan_.reset();
  pause_skip_ = 0;
  finish_transaction();
  return false;
}

void FrogNode::fail_attempt() {
  const Priority prio = *active_;
  const bool was_waiting_sack = phase_ == FrogPhase::kWaitSack;
  if (!count_retry(prio)) return;

  const int slots = draw_backoff(contention_, prio, backoff_rng_);
  if (prio == Priority::kUrgent && pause_claim_) pause_skip_ = slots;
  // Without the final SACK the sender cannot tell what arrived; re-sending
  // the last fragment makes the sink answer with SACK or NACK.
  if (was_waiting_sack) plan_->next_index = plan_->total - 1;
  pause_claim_ = false;
  phase_ = FrogPhase::kBackoff;
  note_draw(prio, active_packet().id, slots);
  start_backoff(slots);
}

void FrogNode::finish_transaction() {
  phase_ = FrogPhase::kIdle;
  active_.reset();
  pause_claim_ = false;
  try_start();
}

}  // namespace macsim
