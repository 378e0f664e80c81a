#pragma once

#include <optional>

#include "macsim/mac_node.hpp"

namespace macsim {

enum class BopPhase : std::uint8_t { kIdle, kBackoff, kAwaitingCts, kTransmitting, kAwaitingAck };

struct BopNodeState {
  BopPhase phase = BopPhase::kIdle;
  int remaining_slots = 0;
  int retry_count = 0;
  std::optional<Packet> current;
};

enum class DataOutcome : std::uint8_t { kAckReceived, kAckTimeout };
enum class OutcomeAction : std::uint8_t { kDelivered, kRetry, kDrop };

/// Transaction bookkeeping after a DATA frame. A timeout re-draws from the
/// same (fixed) window of the packet's class; past max_retries the packet
/// is given up. Delivery and drop leave the state idle.
OutcomeAction on_data_outcome(BopNodeState& state, DataOutcome outcome, const ContentionConfig& cfg,
                              RngStream& rng);

struct BopConfig {
  ContentionConfig contention;
  /// Precede DATA with an RTS/CTS exchange. Off by default.
  bool rts_cts = false;
};

/// Station running BoP-MAC: per-class contention window, whole-packet DATA,
/// ACK from the sink. A started transaction is never pre-empted.
class BopNode final : public MacNode {
 public:
  BopNode(NodeId id, Simulator& sim, Medium& medium, const BopConfig& cfg, RunMetrics& metrics,
          std::uint64_t master_seed, std::size_t queue_capacity);

  BopNodeState state() const {
    BopNodeState s = state_;
    s.remaining_slots = remaining_slots();
    return s;
  }

  void on_transmit_end(const Frame& frame) override;

 protected:
  void on_new_packet(const Packet& p) override;
  void handle_frame(const Frame& frame, SimTime started) override;
  void on_backoff_expired() override;

 private:
  void try_start();
  void send_data();
  void on_timeout();
  void apply(OutcomeAction action);
  void arm_timeout(Duration after);

  const BopConfig& cfg_;
  BopNodeState state_;
  EventHandle timeout_;
};

/// BoP-MAC sink: ACKs every intact DATA frame (and grants CTS in RTS mode).
class BopSink final : public Station {
 public:
  BopSink(Simulator& sim, Medium& medium, const BopConfig& cfg);

  void on_transmit_end(const Frame& frame) override;
  void on_receive(const Frame& frame, SimTime started) override;

 private:
  Simulator& sim_;
  Medium& medium_;
  const BopConfig& cfg_;
};

}  // namespace macsim
