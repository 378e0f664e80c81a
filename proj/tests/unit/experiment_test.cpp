#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "macsim/experiment.hpp"

using namespace macsim;
using namespace std::chrono_literals;

TEST(ParseConfig, EmptyTextGivesDefaults) {
  const auto c = parse_config("");
  EXPECT_EQ(c.protocol, Protocol::kBop);
  EXPECT_EQ(c.node_count, 11);
  EXPECT_EQ(c.duration, 1000s);
  EXPECT_EQ(c.replications, 5);
  EXPECT_EQ(c.normal_period, 200ms);
  EXPECT_EQ(c.urgent_mean, 2s);
  EXPECT_EQ(c.slot_time, 320us);
  EXPECT_EQ(c.t_int, 600us);
  EXPECT_EQ(c.per_byte_time, 32us);
  EXPECT_EQ(c.max_retries, 5);
}

TEST(ParseConfig, FrogWithFragmentSize) {
  const auto c = parse_config("# comment\nprotocol = frog\n\nfragment_payload = 16  # trailing\n");
  EXPECT_EQ(c.protocol, Protocol::kFrog);
  EXPECT_EQ(c.fragment_payload, 16u);
}

TEST(ParseConfig, DurationSuffixes) {
  const auto c = parse_config("duration = 250\nt_int = 600us\nslot_time = 0.32ms\nwarmup = 1500000000ns\n");
  EXPECT_EQ(c.duration, 250s);
  EXPECT_EQ(c.t_int, 600us);
  EXPECT_EQ(c.slot_time, 320us);
  EXPECT_EQ(c.warmup, 1500ms);
}

namespace {

int error_line(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigParseError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST(ParseConfig, FragmentPayloadZeroIsARangeError) {
  EXPECT_EQ(error_line("protocol = frog\nfragment_payload = 0\n"), 2);
  try {
    parse_config("fragment_payload = 0");
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("fragment_payload"), std::string::npos);
  }
}

TEST(ParseConfig, ErrorsNameTheLine) {
  EXPECT_EQ(error_line("node_count = 3\nbogus = 1\n"), 2);
  EXPECT_EQ(error_line("\n\nnode_count 3\n"), 3);
  EXPECT_EQ(error_line("node_count = three\n"), 1);
  EXPECT_EQ(error_line("node_count = 1\n"), 1);
  EXPECT_EQ(error_line("duration = 10 parsecs\n"), 1);
  EXPECT_EQ(error_line("protocol = csma\n"), 1);
  EXPECT_EQ(error_line("bop_rts_cts = maybe\n"), 1);
}

TEST(ParseConfig, CrossFieldErrorsAreRejected) {
  EXPECT_THROW(parse_config("duration = 10\nwarmup = 20\n"), ConfigError);
}

TEST(ParseConfig, EveryKeyIsAccepted) {
  ExperimentConfig c;
  for (auto key : config_keys()) {
    std::string value = "1";
    if (key == "protocol") value = "frog";
    if (key == "node_count") value = "3";
    if (key == "fragment_payload") value = "16";
    if (key == "output") value = "x.csv";
    if (key == "t_int") value = "600us";
    if (key == "slot_time" || key == "per_byte_time") value = "32us";
    if (key == "warmup") value = "0";
    EXPECT_NO_THROW(set_field(c, key, value)) << key;
  }
}

TEST(Environment, SeedOverride) {
  ExperimentConfig c;
  ::setenv("MACSIM_SEED", "99", 1);
  apply_environment(c);
  ::unsetenv("MACSIM_SEED");
  EXPECT_EQ(c.master_seed, 99u);
}

TEST(RunConfig, SeedIsMasterPlusReplication) {
  ExperimentConfig c;
  c.master_seed = 40;
  EXPECT_EQ(c.run_config(0).seed, 40u);
  EXPECT_EQ(c.run_config(3).seed, 43u);
}

namespace {

ExperimentConfig small(Protocol p, int nodes, int reps = 2) {
  ExperimentConfig c;
  c.protocol = p;
  c.node_count = nodes;
  c.duration = 30s;
  c.replications = reps;
  c.master_seed = 42;
  return c;
}

}  // namespace

TEST(RunExperiment, TwoExecutionsGiveIdenticalCsv) {
  const auto c = small(Protocol::kBop, 11);
  EXPECT_EQ(to_csv(run_experiment(c).rows), to_csv(run_experiment(c).rows));
}

TEST(RunExperiment, ThreadedAndSerialAgree) {
  auto c = small(Protocol::kFrog, 6, 3);
  const auto serial = to_csv(run_experiment(c).rows);
  c.jobs = 3;
  EXPECT_EQ(to_csv(run_experiment(c).rows), serial);
}

TEST(RunExperiment, SingleReplicationHasNoCi) {
  const auto res = run_experiment(small(Protocol::kBop, 3, 1));
  ASSERT_EQ(res.rows.size(), 2u);
  for (const auto& row : res.rows) {
    EXPECT_TRUE(row.mean_delay_ms);
    EXPECT_FALSE(row.delay_ci_ms);
    EXPECT_FALSE(row.throughput_ci_Bps);
  }
  const auto csv = to_csv(res.rows);
  EXPECT_NE(csv.find("bop,3,,urgent,"), std::string::npos);
  EXPECT_NE(csv.find(",,"), std::string::npos);
}

TEST(RunExperiment, SmallerFragmentsSlowNormalTrafficOfALoneSource) {
  auto c = small(Protocol::kFrog, 2, 1);
  c.fragment_payload = 121;
  const double whole = *run_experiment(c).rows[1].mean_delay_ms;
  c.fragment_payload = 2;
  const double tiny = *run_experiment(c).rows[1].mean_delay_ms;
  EXPECT_GT(tiny, whole);
  // 60 extra pauses alone account for 36 ms.
  EXPECT_GT(tiny - whole, 36.0);
}

TEST(Csv, HeaderAndFixedFormat) {
  ResultRow r;
  r.protocol = "frog";
  r.node_count = 5;
  r.fragment_payload = 16;
  r.priority = Priority::kUrgent;
  r.mean_delay_ms = 6.1;
  r.delay_ci_ms = 0.25;
  r.throughput_Bps = 60.5;
  r.delivered = 10;
  r.dropped = 1;
  r.collisions = 2;
  EXPECT_EQ(to_csv({r}),
            "protocol,node_count,fragment_payload,priority,mean_delay_ms,delay_ci_ms,throughput_Bps,"
            "throughput_ci_Bps,delivered,dropped,collisions\n"
            "frog,5,16,urgent,6.100000,0.250000,60.5000,,10,1,2\n");
}

TEST(SweepFigures, ShapeAndSharedBopRows) {
  ExperimentConfig base;
  base.duration = 5s;
  base.replications = 2;
  const auto sweep = sweep_figures(base);
  ASSERT_EQ(sweep.tables.size(), 4u);
  for (const auto& [name, rows] : sweep.tables) EXPECT_EQ(rows.size(), 40u) << name;
  for (const auto& r : sweep.tables.at("fig4a")) {
    if (r.protocol == "frog") EXPECT_EQ(r.fragment_payload, 16);
  }
  for (const auto& r : sweep.tables.at("fig4b")) {
    if (r.protocol == "frog") EXPECT_EQ(r.fragment_payload, 2);
  }
  std::vector<ResultRow> bop_a, bop_b;
  for (const auto& r : sweep.tables.at("fig4a")) {
    if (r.protocol == "bop") bop_a.push_back(r);
  }
  for (const auto& r : sweep.tables.at("fig4b")) {
    if (r.protocol == "bop") bop_b.push_back(r);
  }
  EXPECT_EQ(to_csv(bop_a), to_csv(bop_b));
}
