#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "macsim/mac_node.hpp"

namespace macsim {

// ---------------------------------------------------------------------------
// Fragmentation arithmetic
// ---------------------------------------------------------------------------

/// ceil(payload_len / fragment_payload). Throws ConfigError when
/// fragment_payload < 1 or payload_len < 1.
int fragment_count(std::uint32_t payload_len, std::uint32_t fragment_payload);

/// On-air bytes of a fragment: its payload share plus the 6-byte header.
/// The last fragment carries the remainder (or a full share when the
/// payload divides evenly).
std::uint32_t frag_frame_size(std::uint32_t fragment_payload, bool is_last, std::uint32_t payload_len,
                              std::uint32_t header = frame_size::kHeader);

/// Payload bytes carried by fragment `index` of a plan.
std::uint32_t fragment_share(std::uint32_t payload_len, std::uint32_t fragment_payload, int index);

struct FrogConfig {
  std::uint32_t fragment_payload = 16;
  Duration t_int = std::chrono::microseconds{600};
  std::uint32_t frag_header = frame_size::kHeader;
  int max_retries = 5;
  ContentionConfig contention;
  /// After an urgent takeover the interrupted sender contends again with
  /// the normal window before continuing. When false it continues straight
  /// after ACK_P_FRAG.
  bool recontend_after_interrupt = true;

  /// Throws ConfigError on fragment_payload outside [2, 121] or a t_int
  /// too short to fit an RTS.
  void validate(const PhyConfig& phy) const;
};

/// Sender-side progress through one normal packet.
struct FragmentPlan {
  std::uint64_t packet_id = 0;
  std::uint32_t payload_len = frame_size::kPayload;
  int total = 0;
  int next_index = 0;
  std::vector<bool> sent;

  FragmentPlan() = default;
  FragmentPlan(const Packet& p, std::uint32_t fragment_payload);
  bool finished() const { return next_index >= total; }
};

/// Airtime of fragments [from, total), the pauses between them, and the
/// closing SACK. Used for reservations advertised in CTS and FRAG frames.
Duration burst_remaining(const PhyConfig& phy, const FrogConfig& cfg, std::uint32_t payload_len,
                         int from_index);

// ---------------------------------------------------------------------------
// Sink-side reassembly
// ---------------------------------------------------------------------------

/// Splits a payload into fragment-sized chunks, in index order.
std::vector<std::vector<std::uint8_t>> split_payload(std::span<const std::uint8_t> payload,
                                                     std::uint32_t fragment_payload);

/// Per-(source, packet) fragment bookkeeping at the sink. Adding a fragment
/// twice is harmless. Payload bytes are optional: the simulator tracks
/// presence only, while byte-level users get the original payload back.
class SinkReassembly {
 public:
  struct Key {
    NodeId src = 0;
    std::uint64_t packet_id = 0;
    auto operator<=>(const Key&) const = default;
  };

  struct Entry {
    int total = 0;
    std::uint32_t fragment_payload = 0;
    std::vector<bool> have;
    std::vector<std::vector<std::uint8_t>> chunks;
    SimTime first_arrival{};
    std::optional<SimTime> completed_at;
  };

  /// Returns true if the fragment was new.
  bool add(Key key, int index, int total, SimTime now, std::span<const std::uint8_t> data = {},
           std::uint32_t fragment_payload = 0);

  bool complete(Key key) const;
  /// Lowest missing index, or total when complete. 0 for unknown packets.
  int lowest_missing(Key key) const;
  std::vector<int> missing(Key key) const;
  int received_count(Key key) const;
  const Entry* find(Key key) const;

  /// The concatenated payload iff every fragment (with bytes) is present.
  std::optional<std::vector<std::uint8_t>> reassemble(Key key) const;

  /// Records the completion instant the first time the set becomes full.
  std::optional<SimTime> mark_completed(Key key, SimTime now);

 private:
  std::map<Key, Entry> entries_;
};

// ---------------------------------------------------------------------------
// Sink protocol logic
// ---------------------------------------------------------------------------

/// Differentiated-acknowledgement logic of the FROG-MAC sink, independent
/// of the medium: feed it each intact frame addressed to the sink and send
/// the returned frames back to back, starting when the input frame ended.
class FrogSinkLogic {
 public:
  FrogSinkLogic(PhyConfig phy, FrogConfig cfg) : phy_(phy), cfg_(cfg) {}

  std::vector<Frame> on_frame(const Frame& frame, SimTime started, SimTime ended);

  const SinkReassembly& reassembly() const { return reassembly_; }
  bool in_exchange(SimTime now) const { return exchange_ && now < exchange_->deadline; }
  std::optional<NodeId> interrupted_sender() const {
    return interrupted_ ? std::optional<NodeId>(interrupted_->owner) : std::nullopt;
  }

 private:
  struct Exchange {
    NodeId peer;
    Priority priority;
    SimTime deadline;
  };
  struct Burst {
    NodeId owner;
    std::uint64_t packet_id;
    SimTime pause_opens;
    SimTime pause_closes;
  };

  Duration air(std::uint32_t bytes) const { return tx_duration(phy_, bytes); }
  std::vector<Frame> on_rts(const Frame& f, SimTime started, SimTime ended);
  std::vector<Frame> on_fragment(const Frame& f, SimTime ended);
  std::vector<Frame> on_data(const Frame& f, SimTime ended);

  PhyConfig phy_;
  FrogConfig cfg_;
  SinkReassembly reassembly_;
  std::optional<Exchange> exchange_;
  std::optional<Burst> paused_;       // burst currently in an interruptible pause
  std::optional<Burst> interrupted_;  // burst pre-empted by the urgent exchange in progress
};

class FrogSink final : public Station {
 public:
  FrogSink(Simulator& sim, Medium& medium, const FrogConfig& cfg);

  void on_transmit_end(const Frame& frame) override;
  void on_receive(const Frame& frame, SimTime started) override;

  const FrogSinkLogic& logic() const { return logic_; }

 private:
  void send_next();

  Simulator& sim_;
  Medium& medium_;
  FrogSinkLogic logic_;
  std::vector<Frame> outbox_;
  std::size_t outbox_pos_ = 0;
};

// ---------------------------------------------------------------------------
// Sender
// ---------------------------------------------------------------------------

enum class FrogPhase : std::uint8_t {
  kIdle,
  kBackoff,
  kPauseRtsPending,  // urgent RTS scheduled one slot into an interruptible pause
  kWaitCts,
  kSendingData,
  kWaitAck,
  kSendingFrag,
  kPause,    // own interruptible period between two fragments
  kWaitSack,
  kYielded,  // own burst pre-empted; waiting for ACK_P_FRAG
};

std::string_view to_string(FrogPhase phase);

struct FrogCounters {
  std::uint64_t fragments_sent = 0;
  std::uint64_t pauses = 0;
  std::uint64_t yields = 0;
  std::uint64_t pause_rts_sent = 0;
  std::uint64_t nacks = 0;
};

/// FROG-MAC source station. Normal packets go out as fragments separated by
/// interruptible pauses of t_int; urgent packets go out whole after RTS/CTS.
/// Any station holding urgent traffic may claim a pause (including the
/// burst owner itself) by starting an RTS one slot into it.
class FrogNode final : public MacNode {
 public:
  FrogNode(NodeId id, Simulator& sim, Medium& medium, const FrogConfig& cfg, const PhyConfig& phy,
           RunMetrics& metrics, std::uint64_t master_seed, std::size_t queue_capacity);

  FrogPhase phase() const { return phase_; }
  const std::optional<FragmentPlan>& plan() const { return plan_; }
  const FrogCounters& counters() const { return counters_; }

  void on_transmit_end(const Frame& frame) override;

 protected:
  void on_new_packet(const Packet& p) override;
  void handle_frame(const Frame& frame, SimTime started) override;
  void on_backoff_expired() override;

 private:
  struct PauseWindow {
    NodeId owner;
    SimTime closes;
  };

  void try_start();
  void contend(Priority priority);
  void send_rts();
  void send_data();
  void send_fragment();
  void on_pause_opportunity(const PauseWindow& window);
  void claim_pause(const PauseWindow& window, SimTime rts_at);
  void send_pause_rts();
  void on_pause_expired();
  void on_timeout();
  void fail_attempt();
  /// Counts one failed attempt; past max_retries drops the packet and
  /// returns false.
  bool count_retry(Priority prio);
  void arm_timeout(Duration after);
  void finish_transaction();
  const Packet& active_packet() const;

  const FrogConfig& cfg_;
  PhyConfig phy_;
  FrogPhase phase_ = FrogPhase::kIdle;
  std::optional<Priority> active_;
  std::optional<FragmentPlan> plan_;
  int urgent_retries_ = 0;
  int normal_retries_ = 0;
  int pause_skip_ = 0;
  bool pause_claim_ = false;  // the active urgent attempt started inside a pause
  bool yield_ = false;
  std::optional<PauseWindow> pause_;
  EventHandle timeout_;
  EventHandle pause_timer_;
  EventHandle pause_rts_;
  FrogCounters counters_;
};

}  // namespace macsim
