#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "macsim/kernel.hpp"
#include "macsim/sim_time.hpp"

namespace macsim {

inline constexpr NodeId kSinkId = 0;

/// Traffic class. Lower value means more urgent.
enum class Priority : std::uint8_t { kUrgent = 0, kNormal = 1 };
inline constexpr std::size_t kPriorityCount = 2;

std::string_view to_string(Priority p);
constexpr std::size_t index_of(Priority p) { return static_cast<std::size_t>(p); }

enum class FrameKind : std::uint8_t { kRts, kCts, kData, kFrag, kAck, kSack, kNack, kAckPFrag };

std::string_view to_string(FrameKind kind);

namespace frame_size {
inline constexpr std::uint32_t kRts = 5;
inline constexpr std::uint32_t kCts = 5;
inline constexpr std::uint32_t kAck = 5;
inline constexpr std::uint32_t kSack = 6;
inline constexpr std::uint32_t kNack = 6;
inline constexpr std::uint32_t kAckPFrag = 8;
inline constexpr std::uint32_t kData = 127;
inline constexpr std::uint32_t kPayload = 121;
/// DATA size minus payload length.
inline constexpr std::uint32_t kHeader = kData - kPayload;
}  // namespace frame_size

/// Fixed on-air size of a non-FRAG frame kind.
std::uint32_t fixed_frame_size(FrameKind kind);

struct PhyConfig {
  Duration per_byte_time = std::chrono::microseconds{32};
  Duration propagation_delay{0};
};

Duration tx_duration(const PhyConfig& phy, std::uint32_t size_bytes);

struct Frame {
  FrameKind kind = FrameKind::kData;
  std::uint32_t size_bytes = frame_size::kData;
  NodeId src = kSinkId;
  NodeId dst = kSinkId;
  std::uint64_t packet_id = 0;
  std::optional<std::uint16_t> frag_index;
  std::optional<std::uint16_t> frag_total;
  Priority priority = Priority::kNormal;
  /// End of the exchange this frame belongs to, as known by its sender.
  /// Overhearing stations defer until then (virtual carrier sense).
  SimTime reserved_until{};
  /// RTS/CTS: fragment index the burst (re)starts at. NACK and ACK_P_FRAG:
  /// lowest fragment index the sink is still missing.
  std::uint16_t fragment_cursor = 0;
  /// SACK: instant the sink completed reassembly.
  SimTime completed_at{};
};

/// Throws SimulationFault if the frame violates the per-kind size rules or
/// the fragment-field rules.
void validate(const Frame& f);

enum class ChannelState : std::uint8_t { kIdle, kBusy };

/// Implemented by every station attached to the medium.
class Station {
 public:
  virtual ~Station() = default;
  /// The station's own transmission left the air (collided or not).
  virtual void on_transmit_end(const Frame& frame) = 0;
  /// An intact frame from another station ended. Called for every station
  /// in range, whether or not it is the addressee.
  virtual void on_receive(const Frame& frame, SimTime started) = 0;
};

/// One finished transmission, as recorded in the optional airtime log.
struct TxRecord {
  SimTime start{};
  SimTime end{};
  Frame frame;
  bool collided = false;
};

/// Shared single-hop channel. All stations hear each other. Occupancy is
/// [start, end): a frame starting exactly when another ends does not
/// collide. Any overlap destroys every overlapping frame.
class Medium {
 public:
  Medium(Simulator& sim, PhyConfig phy) : sim_(sim), phy_(phy) {}

  const PhyConfig& phy() const { return phy_; }
  Duration airtime(std::uint32_t size_bytes) const { return tx_duration(phy_, size_bytes); }

  /// Stations are indexed by NodeId; ids must be dense from 0.
  void attach(NodeId id, Station* station);

  /// Starting while the channel is busy is legal; that is how collisions
  /// arise. Throws SimulationFault if `src` is already transmitting.
  EventHandle begin_transmission(NodeId src, const Frame& frame);

  /// Busy iff a transmission covers the current instant.
  ChannelState sense() const;

  /// Latest end among transmissions a station can have detected by now:
  /// everything that started strictly before the current instant. Frames
  /// that start at the same instant are invisible to each other, so
  /// stations deciding to transmit at one instant collide.
  SimTime detectable_busy_until() const;

  bool is_transmitting(NodeId id) const;

  std::uint64_t transmitted_frames() const { return transmitted_; }
  std::uint64_t delivered_frames() const { return delivered_; }
  std::uint64_t collided_frames() const { return collided_; }
  std::uint64_t collided_frames(Priority p) const { return collided_by_priority_[index_of(p)]; }

  void set_log(std::vector<TxRecord>* log) { log_ = log; }

 private:
  struct Active {
    NodeId src;
    Frame frame;
    SimTime start;
    SimTime end;
    bool collided;
  };

  void finish(NodeId src);

  Simulator& sim_;
  PhyConfig phy_;
  std::vector<Station*> stations_;
  std::vector<Active> active_;
  SimTime finished_busy_until_{};
  std::uint64_t transmitted_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t collided_ = 0;
  std::uint64_t collided_by_priority_[kPriorityCount] = {};
  std::vector<TxRecord>* log_ = nullptr;
};

}  // namespace macsim
