#include "macsim/metrics.hpp"

#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace macsim {

RunMetrics::RunMetrics(std::size_t node_count, SimTime warmup_end)
    : warmup_end_(warmup_end), per_node_(node_count) {}

ClassCounters& RunMetrics::slot(NodeId node, Priority p) {
  if (node < 0 || static_cast<std::size_t>(node) >= per_node_.size()) {
    throw SimulationFault("metrics: node id out of range");
  }
  return per_node_[node][index_of(p)];
}

const ClassCounters& RunMetrics::counters(NodeId node, Priority p) const {
  return per_node_.at(static_cast<std::size_t>(node))[index_of(p)];
}

void RunMetrics::record_generated(const Packet& p) {
  ++slot(p.src, p.priority).generated;
  ++totals_[index_of(p.priority)].generated;
}

void RunMetrics::record_delivery(const Packet& p, SimTime delivered_at) {
  if (!delivered_ids_.insert(p.id).second) {
    throw SimulationFault("packet " + std::to_string(p.id) + " delivered twice");
  }
  if (delivered_at < p.generated_at) throw SimulationFault("delivery before generation");
  const bool measured = p.generated_at >= warmup_end_;
  for (ClassCounters* c : {&slot(p.src, p.priority), &totals_[index_of(p.priority)]}) {
    ++c->delivered;
    if (measured) {
      c->delivered_bytes += p.payload_len;
      ++c->delay_samples;
      c->delay_sum += delivered_at - p.generated_at;
    }
  }
  if (measured) samples_.push_back(DelaySample{p.id, p.priority, p.generated_at, delivered_at});
}

void RunMetrics::record_drop(const Packet& p, DropReason reason) {
  for (ClassCounters* c : {&slot(p.src, p.priority), &totals_[index_of(p.priority)]}) {
    if (reason == DropReason::kQueueFull) {
      ++c->dropped_queue;
    } else {
      ++c->dropped_retry;
    }
  }
}

std::optional<Duration> RunMetrics::mean_delay(Priority p) const {
  const auto& c = totals_[index_of(p)];
  if (c.delay_samples == 0) return std::nullopt;
  return c.delay_sum / static_cast<Duration::rep>(c.delay_samples);
}

double throughput(const ClassCounters& c, Duration measured) {
  if (measured <= Duration::zero()) throw ConfigError("throughput: measurement window must be positive");
  return static_cast<double>(c.delivered_bytes) / to_seconds(measured);
}

double student_t_975(std::size_t dof) {
  if (dof == 0) throw ConfigError("student_t_975: zero degrees of freedom");
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, 0.975);
}

ConfidenceInterval ci95(std::span<const double> values) {
  ConfidenceInterval out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() < 2) return out;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  const double stddev = std::sqrt(ss / (n - 1.0));
  out.half_width = student_t_975(values.size() - 1) * stddev / std::sqrt(n);
  return out;
}

ConfidenceInterval MetricSeries::delay_ms() const {
  std::vector<double> v;
  for (const auto& r : replications) {
    if (r.mean_delay_ms) v.push_back(*r.mean_delay_ms);
  }
  return ci95(v);
}

ConfidenceInterval MetricSeries::throughput_Bps() const {
  std::vector<double> v;
  for (const auto& r : replications) v.push_back(r.throughput_Bps);
  return ci95(v);
}

std::uint64_t MetricSeries::delivered() const {
  std::uint64_t s = 0;
  for (const auto& r : replications) s += r.delivered;
  return s;
}

std::uint64_t MetricSeries::dropped() const {
  std::uint64_t s = 0;
  for (const auto& r : replications) s += r.dropped;
  return s;
}

std::uint64_t MetricSeries::collisions() const {
  std::uint64_t s = 0;
  for (const auto& r : replications) s += r.collisions;
  return s;
}

}  // namespace macsim
