#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "macsim/metrics.hpp"

using namespace macsim;
using namespace std::chrono_literals;

TEST(RunMetrics, DeliveryRecordsDelay) {
  RunMetrics m(2);
  Packet p{1, Priority::kNormal, 1, at(10s)};
  m.record_generated(p);
  m.record_delivery(p, at(10s + 20ms));
  ASSERT_EQ(m.samples().size(), 1u);
  EXPECT_EQ(m.samples()[0].delay(), 20ms);
  EXPECT_EQ(m.mean_delay(Priority::kNormal), 20ms);
  EXPECT_EQ(m.counters(Priority::kNormal).delivered_bytes, 121u);
  EXPECT_EQ(m.counters(1, Priority::kNormal).delivered, 1u);
}

TEST(RunMetrics, DoubleDeliveryIsAFault) {
  RunMetrics m(2);
  Packet p{1, Priority::kUrgent, 1, at(1s)};
  m.record_delivery(p, at(2s));
  EXPECT_THROW(m.record_delivery(p, at(3s)), SimulationFault);
}

TEST(RunMetrics, DeliveryBeforeGenerationIsAFault) {
  RunMetrics m(2);
  EXPECT_THROW(m.record_delivery(Packet{1, Priority::kUrgent, 1, at(2s)}, at(1s)), SimulationFault);
}

TEST(RunMetrics, DropLeavesNoSample) {
  RunMetrics m(2);
  Packet p{1, Priority::kNormal, 1, at(1s)};
  m.record_drop(p, DropReason::kRetryLimit);
  EXPECT_TRUE(m.samples().empty());
  EXPECT_EQ(m.counters(Priority::kNormal).dropped(), 1u);
  EXPECT_FALSE(m.mean_delay(Priority::kNormal));
}

TEST(RunMetrics, WarmupExcludesEarlyPackets) {
  RunMetrics m(2, at(5s));
  m.record_delivery(Packet{1, Priority::kNormal, 1, at(4s)}, at(6s));
  m.record_delivery(Packet{2, Priority::kNormal, 1, at(5s)}, at(6s));
  EXPECT_EQ(m.counters(Priority::kNormal).delivered, 2u);
  EXPECT_EQ(m.counters(Priority::kNormal).delay_samples, 1u);
  EXPECT_EQ(m.counters(Priority::kNormal).delivered_bytes, 121u);
}

TEST(Throughput, PayloadBytesOverDuration) {
  ClassCounters c;
  c.delivered_bytes = 5000 * 121;
  EXPECT_DOUBLE_EQ(throughput(c, 1000s), 605.0);
  EXPECT_DOUBLE_EQ(throughput(ClassCounters{}, 1000s), 0.0);
  c.delivered_bytes = 500 * 121;
  EXPECT_DOUBLE_EQ(throughput(c, 1000s), 60.5);
}

TEST(Ci95, ZeroVariance) {
  const std::vector<double> v{3, 3, 3, 3, 3};
  const auto ci = ci95(v);
  EXPECT_DOUBLE_EQ(ci.mean, 3.0);
  ASSERT_TRUE(ci.half_width);
  EXPECT_DOUBLE_EQ(*ci.half_width, 0.0);
}

TEST(Ci95, OneToFive) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto ci = ci95(v);
  EXPECT_DOUBLE_EQ(ci.mean, 3.0);
  ASSERT_TRUE(ci.half_width);
  // Hand oracle: t(0.975, 4) = 2.776, s = sqrt(2.5).
  EXPECT_NEAR(*ci.half_width, 2.776 * std::sqrt(2.5) / std::sqrt(5.0), 0.001);
  EXPECT_NEAR(*ci.half_width, 1.963, 0.001);
}

TEST(Ci95, SingleValueHasNoHalfWidth) {
  const std::vector<double> v{4.0};
  const auto ci = ci95(v);
  EXPECT_DOUBLE_EQ(ci.mean, 4.0);
  EXPECT_FALSE(ci.half_width);
}

TEST(Ci95, ShrinkingTowardMeanNeverWidens) {
  std::vector<double> v{1.0, 7.0, 2.5, 9.0, 4.0};
  double prev = *ci95(v).half_width;
  const double mean = ci95(v).mean;
  for (int step = 0; step < 10; ++step) {
    for (double& x : v) x = mean + 0.8 * (x - mean);
    const double hw = *ci95(v).half_width;
    EXPECT_GE(hw, 0.0);
    EXPECT_LE(hw, prev + 1e-12);
    prev = hw;
  }
}

TEST(StudentT, KnownQuantiles) {
  EXPECT_NEAR(student_t_975(4), 2.776445, 1e-6);
  EXPECT_NEAR(student_t_975(1), 12.706205, 1e-5);
  EXPECT_NEAR(student_t_975(1000), 1.962339, 1e-5);
}

TEST(MetricSeries, AggregatesReplicationsInOrder) {
  MetricSeries s;
  for (double d : {1.0, 2.0, 3.0, 4.0, 5.0}) {
    ReplicationSummary r;
    r.mean_delay_ms = d;
    r.throughput_Bps = 10 * d;
    r.delivered = 1;
    r.dropped = 2;
    r.collisions = 3;
    s.replications.push_back(r);
  }
  EXPECT_DOUBLE_EQ(s.delay_ms().mean, 3.0);
  EXPECT_NEAR(*s.delay_ms().half_width, 1.963, 0.001);
  EXPECT_DOUBLE_EQ(s.throughput_Bps().mean, 30.0);
  EXPECT_EQ(s.delivered(), 5u);
  EXPECT_EQ(s.dropped(), 10u);
  EXPECT_EQ(s.collisions(), 15u);
}
