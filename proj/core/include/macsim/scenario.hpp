#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string_view>
#include <vector>

#include "macsim/bop_mac.hpp"
#include "macsim/frog_mac.hpp"

namespace macsim {

enum class Protocol : std::uint8_t { kBop, kFrog };

std::string_view to_string(Protocol p);
/// Accepts "bop" and "frog". Throws ConfigError otherwise.
Protocol parse_protocol(std::string_view text);

/// Everything one simulation run needs. node_count includes the sink.
struct RunConfig {
  Protocol protocol = Protocol::kBop;
  int node_count = 11;
  std::uint32_t fragment_payload = 16;
  Duration duration = std::chrono::seconds{1000};
  std::uint64_t seed = 1;
  PhyConfig phy;
  ContentionConfig contention;
  Duration t_int = std::chrono::microseconds{600};
  std::size_t queue_capacity = 50;
  std::uint32_t payload_len = frame_size::kPayload;
  /// Generators attached to every source node.
  std::vector<GeneratorSpec> generators{GeneratorSpec::default_normal(), GeneratorSpec::default_urgent()};
  bool bop_rts_cts = false;
  bool recontend_after_interrupt = true;
  /// Packets generated before this instant are excluded from delay and
  /// throughput (they still count for conservation).
  Duration warmup{0};
  bool record_frames = false;
  bool record_backoff = false;
  std::ostream* trace = nullptr;

  void validate() const;
};

struct RunResult {
  RunMetrics metrics;
  Duration measured{0};
  std::array<std::uint64_t, kPriorityCount> residual{};
  std::array<std::uint64_t, kPriorityCount> collisions{};
  std::uint64_t collided_frames = 0;
  std::uint64_t events = 0;
  std::vector<TxRecord> frames;
  std::vector<BackoffDraw> backoffs;
  FrogCounters frog;

  double throughput_Bps(Priority p) const { return throughput(metrics.counters(p), measured); }
};

/// One network: a sink (node 0) and node_count - 1 sources, all in range of
/// each other. Not copyable; stations keep references into it.
class Scenario {
 public:
  explicit Scenario(RunConfig cfg);
  ~Scenario();
  Scenario(const Scenario&) = delete;
  Scenario& operator=(const Scenario&) = delete;

  /// Hands a packet to `node` at `at`, in addition to the generators.
  void schedule_packet(NodeId node, Priority priority, SimTime at);

  /// Runs to cfg.duration. Call once.
  RunResult run();

  Simulator& sim() { return sim_; }
  const Medium& medium() const { return medium_; }
  const MacNode& node(NodeId id) const { return *nodes_.at(static_cast<std::size_t>(id - 1)); }

 private:
  std::uint64_t next_id() { return ++last_id_; }

  RunConfig cfg_;
  BopConfig bop_;
  FrogConfig frog_;
  Simulator sim_;
  Medium medium_;
  RunMetrics metrics_;
  std::vector<TxRecord> frames_;
  std::vector<BackoffDraw> backoffs_;
  std::unique_ptr<Station> sink_;
  std::vector<std::unique_ptr<MacNode>> nodes_;
  std::vector<std::unique_ptr<ArrivalProcess>> arrivals_;
  std::uint64_t last_id_ = 0;
  bool ran_ = false;
};

/// Convenience wrapper: build and run.
RunResult run_once(const RunConfig& cfg);

}  // namespace macsim
