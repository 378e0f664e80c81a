#include "macsim/scenario.hpp"

#include <ostream>

namespace macsim {

std::string_view to_string(Protocol p) { return p == Protocol::kBop ? "bop" : "frog"; }

Protocol parse_protocol(std::string_view text) {
  if (text == "bop") return Protocol::kBop;
  if (text == "frog") return Protocol::kFrog;
  throw ConfigError("unknown protocol '" + std::string(text) + "' (expected bop or frog)");
}

void RunConfig::validate() const {
  if (node_count < 2) throw ConfigError("node_count must be >= 2 (one source and the sink)");
  if (duration <= Duration::zero()) throw ConfigError("duration must be positive");
  if (warmup < Duration::zero() || warmup >= duration) throw ConfigError("warmup must lie in [0, duration)");
  if (queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
  if (payload_len < 1 || payload_len > frame_size::kPayload) throw ConfigError("payload_len must be in [1, 121]");
  if (phy.per_byte_time <= Duration::zero()) throw ConfigError("per-byte time must be positive");
  for (const auto& g : generators) {
    if (g.interval <= Duration::zero()) throw ConfigError("generator interval must be positive");
  }
  contention.validate();
}

Scenario::Scenario(RunConfig cfg)
    : cfg_(std::move(cfg)),
      sim_(),
      medium_(sim_, cfg_.phy),
      metrics_(static_cast<std::size_t>(cfg_.node_count), kSimStart + cfg_.warmup) {
  cfg_.validate();
  bop_.contention = cfg_.contention;
  bop_.rts_cts = cfg_.bop_rts_cts;
  frog_.contention = cfg_.contention;
  frog_.fragment_payload = cfg_.fragment_payload;
  frog_.t_int = cfg_.t_int;
  frog_.max_retries = cfg_.contention.max_retries;
  frog_.recontend_after_interrupt = cfg_.recontend_after_interrupt;
  if (cfg_.protocol == Protocol::kFrog) frog_.validate(cfg_.phy);

  if (cfg_.record_frames) medium_.set_log(&frames_);
  if (cfg_.trace) {
    std::ostream* os = cfg_.trace;
    sim_.set_trace_hook([os](const Event& ev) { write_trace_line(*os, ev); });
  }

  if (cfg_.protocol == Protocol::kBop) {
    sink_ = std::make_unique<BopSink>(sim_, medium_, bop_);
  } else {
    sink_ = std::make_unique<FrogSink>(sim_, medium_, frog_);
  }
  medium_.attach(kSinkId, sink_.get());

  for (NodeId id = 1; id < cfg_.node_count; ++id) {
    std::unique_ptr<MacNode> node;
    if (cfg_.protocol == Protocol::kBop) {
      node = std::make_unique<BopNode>(id, sim_, medium_, bop_, metrics_, cfg_.seed, cfg_.queue_capacity);
    } else {
      node = std::make_unique<FrogNode>(id, sim_, medium_, frog_, cfg_.phy, metrics_, cfg_.seed,
                                        cfg_.queue_capacity);
    }
    if (cfg_.record_backoff) node->set_backoff_log(&backoffs_);
    medium_.attach(id, node.get());
    MacNode* raw = node.get();
    nodes_.push_back(std::move(node));
    for (const auto& spec : cfg_.generators) {
      arrivals_.push_back(std::make_unique<ArrivalProcess>(
          sim_, id, spec, cfg_.seed, [this] { return next_id(); },
          [raw](const Packet& p) { raw->on_packet_arrival(p); }, cfg_.payload_len));
    }
  }
}

Scenario::~Scenario() = default;

void Scenario::schedule_packet(NodeId node, Priority priority, SimTime at) {
  if (node < 1 || node >= cfg_.node_count) throw ConfigError("no source node " + std::to_string(node));
  MacNode* target = nodes_[static_cast<std::size_t>(node - 1)].get();
  sim_.schedule(at, node, EventKind::kArrival, [this, target, node, priority] {
    Packet p{next_id(), priority, node, sim_.now(), cfg_.payload_len};
    target->on_packet_arrival(p);
  });
}

RunResult Scenario::run() {
  if (ran_) throw SimulationFault("scenario already ran");
  ran_ = true;
  for (auto& a : arrivals_) a->start();
  const std::uint64_t events = sim_.run_until(kSimStart + cfg_.duration);

  RunResult r{metrics_};
  r.measured = cfg_.duration - cfg_.warmup;
  r.events = events;
  for (const auto& n : nodes_) {
    for (Priority p : {Priority::kUrgent, Priority::kNormal}) r.residual[index_of(p)] += n->queues().size(p);
    if (const auto* f = dynamic_cast<const FrogNode*>(n.get())) {
      r.frog.fragments_sent += f->counters().fragments_sent;
      r.frog.pauses += f->counters().pauses;
      r.frog.yields += f->counters().yields;
      r.frog.pause_rts_sent += f->counters().pause_rts_sent;
      r.frog.nacks += f->counters().nacks;
    }
  }
  for (Priority p : {Priority::kUrgent, Priority::kNormal}) r.collisions[index_of(p)] = medium_.collided_frames(p);
  r.collided_frames = medium_.collided_frames();
  r.frames = std::move(frames_);
  r.backoffs = std::move(backoffs_);
  return r;
}

RunResult run_once(const RunConfig& cfg) {
  Scenario s(cfg);
  return s.run();
}

}  // namespace macsim
