#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>

#include "macsim/kernel.hpp"
#include "macsim/medium.hpp"
#include "macsim/rng.hpp"

namespace macsim {

struct Packet {
  std::uint64_t id = 0;
  Priority priority = Priority::kNormal;
  NodeId src = 0;
  SimTime generated_at{};
  std::uint32_t payload_len = frame_size::kPayload;
};

enum class ArrivalLaw : std::uint8_t { kCbr, kPoisson };

struct GeneratorSpec {
  Priority priority = Priority::kNormal;
  ArrivalLaw law = ArrivalLaw::kCbr;
  /// CBR period, or mean inter-arrival for Poisson.
  Duration interval = std::chrono::milliseconds{200};

  static GeneratorSpec cbr(Priority p, Duration period) { return {p, ArrivalLaw::kCbr, period}; }
  static GeneratorSpec poisson(Priority p, Duration mean) { return {p, ArrivalLaw::kPoisson, mean}; }

  static GeneratorSpec default_normal() { return cbr(Priority::kNormal, std::chrono::milliseconds{200}); }
  static GeneratorSpec default_urgent() { return poisson(Priority::kUrgent, std::chrono::seconds{2}); }
};

/// CBR: exactly now + period. Poisson: now + Exp(mean), rounded to ns.
SimTime next_arrival(const GeneratorSpec& spec, RngStream& rng, SimTime now);

/// Per-node transmit queues, one FIFO per priority, urgent served first.
/// A packet stays at the head of its FIFO while the MAC works on it and is
/// removed with complete() once the transaction ends (delivered or given up).
class NodeQueues {
 public:
  explicit NodeQueues(std::size_t capacity = 50) : capacity_(capacity) {}

  /// Returns false, and counts a drop, if the packet's FIFO is full.
  bool enqueue(const Packet& p);

  /// Head of the urgent FIFO if any, else head of the normal FIFO.
  const Packet* select_next() const;
  const Packet* head(Priority p) const;

  /// Removes the head of the FIFO for `p`.
  Packet complete(Priority p);

  std::size_t size(Priority p) const { return fifo(p).size(); }
  bool empty() const { return urgent_.empty() && normal_.empty(); }
  std::size_t capacity() const { return capacity_; }
  std::uint64_t drops(Priority p) const { return drops_[index_of(p)]; }

 private:
  const std::deque<Packet>& fifo(Priority p) const { return p == Priority::kUrgent ? urgent_ : normal_; }
  std::deque<Packet>& fifo(Priority p) { return p == Priority::kUrgent ? urgent_ : normal_; }

  std::size_t capacity_;
  std::deque<Packet> urgent_;
  std::deque<Packet> normal_;
  std::uint64_t drops_[kPriorityCount] = {};
};

/// Drives one generator on the simulator: draws arrival times and hands
/// each new packet to `sink`. CBR sources start at period - offset with a
/// seeded offset in [0, period), so every source sees duration/period
/// arrivals while sources stay de-synchronised.
class ArrivalProcess {
 public:
  using PacketSink = std::function<void(const Packet&)>;
  using IdSource = std::function<std::uint64_t()>;

  ArrivalProcess(Simulator& sim, NodeId node, GeneratorSpec spec, std::uint64_t master_seed,
                 IdSource next_id, PacketSink sink, std::uint32_t payload_len = frame_size::kPayload);

  void start();
  std::uint64_t generated() const { return generated_; }
  const GeneratorSpec& spec() const { return spec_; }

 private:
  void fire();

  Simulator& sim_;
  NodeId node_;
  GeneratorSpec spec_;
  RngStream rng_;
  RngStream jitter_;
  IdSource next_id_;
  PacketSink sink_;
  std::uint32_t payload_len_;
  std::uint64_t generated_ = 0;
};

}  // namespace macsim
