#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "macsim/traffic.hpp"

namespace macsim {

struct DelaySample {
  std::uint64_t packet_id = 0;
  Priority priority = Priority::kNormal;
  SimTime generated_at{};
  SimTime delivered_at{};

  Duration delay() const { return delivered_at - generated_at; }
};

enum class DropReason : std::uint8_t { kQueueFull, kRetryLimit };

/// Per-priority tallies of one run.
struct ClassCounters {
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_queue = 0;
  std::uint64_t dropped_retry = 0;
  /// Payload bytes of delivered packets counted toward throughput (i.e.
  /// generated at or after the warm-up cut).
  std::uint64_t delivered_bytes = 0;
  std::uint64_t delay_samples = 0;
  Duration delay_sum{0};

  std::uint64_t dropped() const { return dropped_queue + dropped_retry; }
};

/// Accumulates delay samples and delivered bytes for a single run.
class RunMetrics {
 public:
  RunMetrics(std::size_t node_count, SimTime warmup_end = kSimStart);

  void record_generated(const Packet& p);
  /// Throws SimulationFault on a second delivery of the same packet or a
  /// delivery time before generation.
  void record_delivery(const Packet& p, SimTime delivered_at);
  void record_drop(const Packet& p, DropReason reason);

  const ClassCounters& counters(Priority p) const { return totals_[index_of(p)]; }
  const ClassCounters& counters(NodeId node, Priority p) const;
  const std::vector<DelaySample>& samples() const { return samples_; }

  /// Mean delay of the samples of a class; nullopt without samples.
  std::optional<Duration> mean_delay(Priority p) const;

  std::size_t node_count() const { return per_node_.size(); }
  SimTime warmup_end() const { return warmup_end_; }

 private:
  ClassCounters& slot(NodeId node, Priority p);

  SimTime warmup_end_;
  std::array<ClassCounters, kPriorityCount> totals_{};
  std::vector<std::array<ClassCounters, kPriorityCount>> per_node_;
  std::vector<DelaySample> samples_;
  std::unordered_set<std::uint64_t> delivered_ids_;
};

/// Delivered payload bytes per second.
double throughput(const ClassCounters& c, Duration measured);

/// Mean and Student-t 95% half-width (t quantile at 0.975, n-1 degrees of
/// freedom, times sample stddev over sqrt(n)). half_width is absent for n < 2.
struct ConfidenceInterval {
  double mean = 0.0;
  std::optional<double> half_width;
};

ConfidenceInterval ci95(std::span<const double> values);

/// Two-sided 95% Student-t critical value for `dof` degrees of freedom.
double student_t_975(std::size_t dof);

/// One replication's summary for a single traffic class.
struct ReplicationSummary {
  std::optional<double> mean_delay_ms;
  double throughput_Bps = 0.0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t collisions = 0;
};

struct SeriesKey {
  std::string protocol;
  int node_count = 0;
  std::optional<int> fragment_payload;
  Priority priority = Priority::kNormal;
};

/// Results of every replication of one configuration and class, in
/// replication-index order.
struct MetricSeries {
  SeriesKey key;
  std::vector<ReplicationSummary> replications;

  /// Mean delay across replications that delivered anything.
  ConfidenceInterval delay_ms() const;
  ConfidenceInterval throughput_Bps() const;
  std::uint64_t delivered() const;
  std::uint64_t dropped() const;
  std::uint64_t collisions() const;
};

}  // namespace macsim
