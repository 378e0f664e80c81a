#include "macsim/medium.hpp"

#include <algorithm>
#include <sstream>

namespace macsim {

std::string_view to_string(Priority p) {
  switch (p) {
    case Priority::kUrgent: return "urgent";
    case Priority::kNormal: return "normal";
  }
  return "unknown";
}

std::string_view to_string(FrameKind kind) {
  switch (kind) {
    case FrameKind::kRts: return "RTS";
    case FrameKind::kCts: return "CTS";
    case FrameKind::kData: return "DATA";
    case FrameKind::kFrag: return "FRAG";
    case FrameKind::kAck: return "ACK";
    case FrameKind::kSack: return "SACK";
    case FrameKind::kNack: return "NACK";
    case FrameKind::kAckPFrag: return "ACK_P_FRAG";
  }
  return "unknown";
}

std::uint32_t fixed_frame_size(FrameKind kind) {
  switch (kind) {
    case FrameKind::kRts: return frame_size::kRts;
    case FrameKind::kCts: return frame_size::kCts;
    case FrameKind::kData: return frame_size::kData;
    case FrameKind::kAck: return frame_size::kAck;
    case FrameKind::kSack: return frame_size::kSack;
    case FrameKind::kNack: return frame_size::kNack;
    case FrameKind::kAckPFrag: return frame_size::kAckPFrag;
    case FrameKind::kFrag: break;
  }
  throw SimulationFault("FRAG frames have no fixed size");
}

Duration tx_duration(const PhyConfig& phy, std::uint32_t size_bytes) {
  if (size_bytes == 0) throw SimulationFault("tx_duration: zero-length frame");
  return phy.per_byte_time * static_cast<Duration::rep>(size_bytes);
}

void validate(const Frame& f) {
  const bool is_frag = f.kind == FrameKind::kFrag;
  if (is_frag != f.frag_index.has_value() || is_frag != f.frag_total.has_value()) {
    throw SimulationFault("fragment fields present iff kind is FRAG");
  }
  if (is_frag) {
    if (*f.frag_index >= *f.frag_total) throw SimulationFault("frag_index out of range");
    if (f.size_bytes < frame_size::kHeader + 1 || f.size_bytes > frame_size::kData) {
      throw SimulationFault("FRAG size outside header+1..127");
    }
    if (f.priority == Priority::kUrgent) throw SimulationFault("urgent packets are never fragmented");
  } else if (f.size_bytes != fixed_frame_size(f.kind)) {
    std::ostringstream msg;
    msg << to_string(f.kind) << " frame has size " << f.size_bytes;
    throw SimulationFault(msg.str());
  }
}

void Medium::attach(NodeId id, Station* station) {
  if (id < 0) throw SimulationFault("negative node id");
  if (static_cast<std::size_t>(id) >= stations_.size()) stations_.resize(id + 1, nullptr);
  stations_[id] = station;
}

EventHandle Medium::begin_transmission(NodeId src, const Frame& frame) {
  validate(frame);
  if (is_transmitting(src)) {
    throw SimulationFault("station " + std::to_string(src) + " is already transmitting");
  }
  const SimTime now = sim_.now();
  const SimTime end = now + airtime(frame.size_bytes);
  bool collided = false;
  for (auto& a : active_) {
    if (a.end > now) {
      a.collided = true;
      collided = true;
    }
  }
  active_.push_back(Active{src, frame, now, end, collided});
  ++transmitted_;
  return sim_.schedule(end + phy_.propagation_delay, src, EventKind::kTxEnd,
                       [this, src] { finish(src); });
}

void Medium::finish(NodeId src) {
  auto it = std::find_if(active_.begin(), active_.end(), [&](const Active& a) { return a.src == src; });
  if (it == active_.end()) throw SimulationFault("transmission end without a matching start");
  const Active done = *it;
  active_.erase(it);
  finished_busy_until_ = std::max(finished_busy_until_, done.end);

  if (done.collided) {
    ++collided_;
    ++collided_by_priority_[index_of(done.frame.priority)];
  } else {
    ++delivered_;
  }
  if (log_) log_->push_back(TxRecord{done.start, done.end, done.frame, done.collided});

  if (static_cast<std::size_t>(src) < stations_.size() && stations_[src]) {
    stations_[src]->on_transmit_end(done.frame);
  }
  if (done.collided) return;
  for (std::size_t i = 0; i < stations_.size(); ++i) {
    if (static_cast<NodeId>(i) == src || !stations_[i]) continue;
    stations_[i]->on_receive(done.frame, done.start);
  }
}

ChannelState Medium::sense() const {
  const SimTime now = sim_.now();
  for (const auto& a : active_) {
    if (a.start <= now && now < a.end) return ChannelState::kBusy;
  }
  return ChannelState::kIdle;
}

SimTime Medium::detectable_busy_until() const {
  const SimTime now = sim_.now();
  SimTime until = finished_busy_until_;
  for (const auto& a : active_) {
    if (a.start < now) until = std::max(until, a.end);
  }
  return until;
}

bool Medium::is_transmitting(NodeId id) const {
  return std::any_of(active_.begin(), active_.end(), [&](const Active& a) { return a.src == id; });
}

}  // namespace macsim
