#pragma once

#include <vector>

#include "macsim/contention.hpp"
#include "macsim/metrics.hpp"
#include "macsim/traffic.hpp"

namespace macsim {

/// One backoff draw, logged when a run asks for it.
struct BackoffDraw {
  NodeId node = 0;
  std::uint64_t packet_id = 0;
  Priority priority = Priority::kNormal;
  int slots = 0;
  SimTime drawn_at{};
};

/// Shared plumbing of a source station: transmit queues, slotted backoff
/// with freezing, and virtual carrier sense from overheard reservations.
///
/// Slot boundaries: a station that starts contending on a quiet channel
/// counts from its own start instant; a frozen station resumes one slot
/// after the channel (physical or reserved) goes quiet, so every station
/// frozen by the same busy period shares the same slot grid.
class MacNode : public Station {
 public:
  MacNode(NodeId id, Simulator& sim, Medium& medium, const ContentionConfig& contention,
          RunMetrics& metrics, std::uint64_t master_seed, std::size_t queue_capacity);
  ~MacNode() override = default;

  MacNode(const MacNode&) = delete;
  MacNode& operator=(const MacNode&) = delete;

  NodeId id() const { return id_; }
  const NodeQueues& queues() const { return queues_; }

  /// Application hand-off. Full queues drop the packet.
  void on_packet_arrival(const Packet& p);

  void on_receive(const Frame& frame, SimTime started) final;

  SimTime reserved_until() const { return nav_; }
  void set_backoff_log(std::vector<BackoffDraw>* log) { backoff_log_ = log; }

 protected:
  virtual void on_new_packet(const Packet& p) = 0;
  virtual void handle_frame(const Frame& frame, SimTime started) = 0;
  /// Counter reached zero on an idle slot.
  virtual void on_backoff_expired() = 0;

  /// Draws from the class window and starts counting.
  void begin_contention(Priority priority, std::uint64_t packet_id);
  void start_backoff(int slots);
  void note_draw(Priority priority, std::uint64_t packet_id, int slots);
  void stop_backoff();
  bool backoff_running() const { return tick_.valid(); }
  int remaining_slots() const { return remaining_slots_; }

  /// Busy if anything was on air or reserved during the slot ending now.
  ChannelState slot_state() const;
  /// Latest of physical occupancy and the overheard reservation.
  SimTime busy_until() const;

  Duration airtime(std::uint32_t bytes) const { return medium_.airtime(bytes); }
  Duration slot() const { return contention_.slot_time; }

  void deliver(const Packet& p, SimTime at);
  void drop_head(Priority p, DropReason reason);

  NodeId id_;
  Simulator& sim_;
  Medium& medium_;
  const ContentionConfig& contention_;
  RunMetrics& metrics_;
  RngStream backoff_rng_;
  NodeQueues queues_;

 private:
  void schedule_tick(SimTime at);
  void on_tick();

  int remaining_slots_ = 0;
  EventHandle tick_;
  SimTime tick_at_{};
  SimTime nav_{};
  std::vector<BackoffDraw>* backoff_log_ = nullptr;
};

}  // namespace macsim
