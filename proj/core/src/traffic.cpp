#include "macsim/traffic.hpp"

namespace macsim {

SimTime next_arrival(const GeneratorSpec& spec, RngStream& rng, SimTime now) {
  switch (spec.law) {
    case ArrivalLaw::kCbr: return now + spec.interval;
    case ArrivalLaw::kPoisson: return now + rng.exponential(spec.interval);
  }
  throw ConfigError("unknown arrival law");
}

bool NodeQueues::enqueue(const Packet& p) {
  auto& q = fifo(p.priority);
  if (q.size() >= capacity_) {
    ++drops_[index_of(p.priority)];
    return false;
  }
  q.push_back(p);
  return true;
}

const Packet* NodeQueues::select_next() const {
  if (!urgent_.empty()) return &urgent_.front();
  if (!normal_.empty()) return &normal_.front();
  return nullptr;
}

const Packet* NodeQueues::head(Priority p) const {
  const auto& q = fifo(p);
  return q.empty() ? nullptr : &q.front();
}

Packet NodeQueues::complete(Priority p) {
  auto& q = fifo(p);
  if (q.empty()) throw SimulationFault("complete() on an empty queue");
  Packet out = q.front();
  q.pop_front();
  return out;
}

namespace {
StreamPurpose arrivals_purpose(Priority p) {
  return p == Priority::kUrgent ? StreamPurpose::kUrgentArrivals : StreamPurpose::kNormalArrivals;
}
}  // namespace

ArrivalProcess::ArrivalProcess(Simulator& sim, NodeId node, GeneratorSpec spec,
                               std::uint64_t master_seed, IdSource next_id, PacketSink sink,
                               std::uint32_t payload_len)
    : sim_(sim),
      node_(node),
      spec_(spec),
      rng_(master_seed, stream_id(node, arrivals_purpose(spec.priority))),
      jitter_(master_seed, stream_id(node, StreamPurpose::kArrivalJitter) + index_of(spec.priority) * 8),
      next_id_(std::move(next_id)),
      sink_(std::move(sink)),
      payload_len_(payload_len) {
  if (spec_.interval <= Duration::zero()) throw ConfigError("generator interval must be positive");
  if (payload_len_ < 1 || payload_len_ > frame_size::kPayload) throw ConfigError("payload_len must be in 1..121");
}

void ArrivalProcess::start() {
  SimTime first{};
  if (spec_.law == ArrivalLaw::kCbr) {
    const auto offset = jitter_.uniform_int(0, spec_.interval.count() - 1);
    first = sim_.now() + spec_.interval - Duration{offset};
  } else {
    first = next_arrival(spec_, rng_, sim_.now());
  }
  sim_.schedule(first, node_, EventKind::kArrival, [this] { fire(); });
}

void ArrivalProcess::fire() {
  Packet p;
  p.id = next_id_();
  p.priority = spec_.priority;
  p.src = node_;
  p.generated_at = sim_.now();
  p.payload_len = payload_len_;
  ++generated_;
  sink_(p);
  sim_.schedule(next_arrival(spec_, rng_, sim_.now()), node_, EventKind::kArrival, [this] { fire(); });
}

}  // namespace macsim
