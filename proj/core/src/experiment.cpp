#include "macsim/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

namespace macsim {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v) {
  Int out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(v) + "'");
}

Duration parse_duration(std::string_view key, std::string_view v) {
  struct Unit {
    std::string_view suffix;
    double ns;
  };
  static constexpr Unit units[] = {{"ns", 1.0}, {"us", 1e3}, {"ms", 1e6}, {"s", 1e9}};
  double scale = 1e9;
  std::string_view number = v;
  for (const auto& u : units) {
    if (v.size() > u.suffix.size() && v.ends_with(u.suffix)) {
      number = trim(v.substr(0, v.size() - u.suffix.size()));
      scale = u.ns;
      break;
    }
  }
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (ec != std::errc{} || ptr != number.data() + number.size() || !std::isfinite(value)) {
    throw ConfigError(std::string(key) + ": expected a duration such as 1000s or 600us, got '" +
                      std::string(v) + "'");
  }
  return Duration{static_cast<Duration::rep>(std::llround(value * scale))};
}

// Range check of a single field, so that errors point at the offending line.
void check_field(const ExperimentConfig& c, std::string_view key) {
  auto positive = [&](Duration d) {
    if (d <= Duration::zero()) throw ConfigError(std::string(key) + " must be positive");
  };
  if (key == "node_count" && (c.node_count < 2 || c.node_count > 64)) {
    throw ConfigError("node_count must be in [2, 64]");
  }
  if (key == "fragment_payload" && (c.fragment_payload < 2 || c.fragment_payload > frame_size::kPayload)) {
    throw ConfigError("fragment_payload must be in [2, 121]");
  }
  if (key == "replications" && c.replications < 1) throw ConfigError("replications must be >= 1");
  if (key == "duration") positive(c.duration);
  if (key == "normal_period") positive(c.normal_period);
  if (key == "urgent_mean") positive(c.urgent_mean);
  if (key == "slot_time") positive(c.slot_time);
  if (key == "per_byte_time") positive(c.per_byte_time);
  if (key == "t_int") positive(c.t_int);
  if (key == "warmup" && c.warmup < Duration::zero()) throw ConfigError("warmup must be >= 0");
  if (key == "max_retries" && c.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (key == "queue_capacity" && c.queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
  if (key == "jobs" && c.jobs < 1) throw ConfigError("jobs must be >= 1");
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

ConfigParseError::ConfigParseError(int line, const std::string& what)
    : ConfigError("line " + std::to_string(line) + ": " + what), line_(line) {}

void ExperimentConfig::validate() const {
  if (node_count < 2 || node_count > 64) throw ConfigError("node_count must be in [2, 64]");
  if (fragment_payload < 2 || fragment_payload > frame_size::kPayload) {
    throw ConfigError("fragment_payload must be in [2, 121]");
  }
  if (replications < 1) throw ConfigError("replications must be >= 1");
  if (duration <= Duration::zero()) throw ConfigError("duration must be positive");
  if (normal_period <= Duration::zero()) throw ConfigError("normal_period must be positive");
  if (urgent_mean <= Duration::zero()) throw ConfigError("urgent_mean must be positive");
  if (slot_time <= Duration::zero()) throw ConfigError("slot_time must be positive");
  if (per_byte_time <= Duration::zero()) throw ConfigError("per_byte_time must be positive");
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (queue_capacity < 1) throw ConfigError("queue_capacity must be >= 1");
  if (warmup < Duration::zero() || warmup >= duration) throw ConfigError("warmup must lie in [0, duration)");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  run_config(0).validate();
  if (protocol == Protocol::kFrog) {
    FrogConfig f;
    f.fragment_payload = fragment_payload;
    f.t_int = t_int;
    f.validate(PhyConfig{per_byte_time, Duration{0}});
  }
}

RunConfig ExperimentConfig::run_config(int replication) const {
  RunConfig rc;
  rc.protocol = protocol;
  rc.node_count = node_count;
  rc.fragment_payload = fragment_payload;
  rc.duration = duration;
  rc.seed = master_seed + static_cast<std::uint64_t>(replication);
  rc.phy.per_byte_time = per_byte_time;
  rc.contention.slot_time = slot_time;
  rc.contention.max_retries = max_retries;
  rc.t_int = t_int;
  rc.queue_capacity = queue_capacity;
  rc.generators = {GeneratorSpec::cbr(Priority::kNormal, normal_period),
                   GeneratorSpec::poisson(Priority::kUrgent, urgent_mean)};
  rc.bop_rts_cts = bop_rts_cts;
  rc.recontend_after_interrupt = recontend_after_interrupt;
  rc.warmup = warmup;
  return rc;
}

const std::vector<std::string_view>& config_keys() {
  static const std::vector<std::string_view> keys{
      "protocol",      "node_count",  "fragment_payload", "duration",       "replications",
      "master_seed",   "normal_period", "urgent_mean",    "slot_time",      "t_int",
      "per_byte_time", "max_retries", "queue_capacity",   "warmup",         "recontend_after_interrupt",
      "bop_rts_cts",   "jobs",        "output"};
  return keys;
}

void set_field(ExperimentConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "protocol") {
    cfg.protocol = parse_protocol(value);
  } else if (key == "node_count") {
    cfg.node_count = parse_int<int>(key, value);
  } else if (key == "fragment_payload") {
    cfg.fragment_payload = parse_int<std::uint32_t>(key, value);
  } else if (key == "duration") {
    cfg.duration = parse_duration(key, value);
  } else if (key == "replications") {
    cfg.replications = parse_int<int>(key, value);
  } else if (key == "master_seed") {
    cfg.master_seed = parse_int<std::uint64_t>(key, value);
  } else if (key == "normal_period") {
    cfg.normal_period = parse_duration(key, value);
  } else if (key == "urgent_mean") {
    cfg.urgent_mean = parse_duration(key, value);
  } else if (key == "slot_time") {
    cfg.slot_time = parse_duration(key, value);
  } else if (key == "t_int") {
    cfg.t_int = parse_duration(key, value);
  } else if (key == "per_byte_time") {
    cfg.per_byte_time = parse_duration(key, value);
  } else if (key == "max_retries") {
    cfg.max_retries = parse_int<int>(key, value);
  } else if (key == "queue_capacity") {
    cfg.queue_capacity = parse_int<std::size_t>(key, value);
  } else if (key == "warmup") {
    cfg.warmup = parse_duration(key, value);
  } else if (key == "recontend_after_interrupt") {
    cfg.recontend_after_interrupt = parse_bool(key, value);
  } else if (key == "bop_rts_cts") {
    cfg.bop_rts_cts = parse_bool(key, value);
  } else if (key == "jobs") {
    cfg.jobs = parse_int<int>(key, value);
  } else if (key == "output") {
    cfg.output = std::string(value);
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigParseError(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigParseError(line_no, "expected 'key = value'");
    try {
      set_field(base, key, value);
      check_field(base, key);
    } catch (const ConfigError& e) {
      throw ConfigParseError(line_no, e.what());
    }
  }
  base.validate();
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void apply_environment(ExperimentConfig& cfg) {
  if (const char* seed = std::getenv("MACSIM_SEED"); seed && *seed) {
    cfg.master_seed = parse_int<std::uint64_t>("MACSIM_SEED", trim(seed));
  }
}

ResultRow make_row(const MetricSeries& s) {
  ResultRow row;
  row.protocol = s.key.protocol;
  row.node_count = s.key.node_count;
  row.fragment_payload = s.key.fragment_payload;
  row.priority = s.key.priority;
  bool any_delay = false;
  for (const auto& r : s.replications) any_delay = any_delay || r.mean_delay_ms.has_value();
  if (any_delay) {
    const auto d = s.delay_ms();
    row.mean_delay_ms = d.mean;
    row.delay_ci_ms = d.half_width;
  }
  const auto t = s.throughput_Bps();
  row.throughput_Bps = t.mean;
  row.throughput_ci_Bps = t.half_width;
  row.delivered = s.delivered();
  row.dropped = s.dropped();
  row.collisions = s.collisions();
  return row;
}

ReplicationOutcome run_replication(const ExperimentConfig& cfg, int replication) {
  ReplicationOutcome out;
  try {
    const RunResult r = run_once(cfg.run_config(replication));
    for (Priority p : {Priority::kUrgent, Priority::kNormal}) {
      auto& s = out.by_priority[index_of(p)];
      const auto& c = r.metrics.counters(p);
      if (auto d = r.metrics.mean_delay(p)) s.mean_delay_ms = to_ms(*d);
      s.throughput_Bps = r.throughput_Bps(p);
      s.delivered = c.delivered;
      s.dropped = c.dropped();
      s.collisions = r.collisions[index_of(p)];
    }
  } catch (const SimulationFault& e) {
    out.fault = std::string("replication ") + std::to_string(replication) + ": " + e.what();
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ReplicationOutcome> outcomes(static_cast<std::size_t>(cfg.replications));
  const int workers = std::min(cfg.jobs, cfg.replications);
  if (workers <= 1) {
    for (int r = 0; r < cfg.replications; ++r) outcomes[r] = run_replication(cfg, r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int r = next++; r < cfg.replications; r = next++) outcomes[r] = run_replication(cfg, r);
      });
    }
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  for (Priority p : {Priority::kUrgent, Priority::kNormal}) {
    MetricSeries s;
    s.key.protocol = std::string(to_string(cfg.protocol));
    s.key.node_count = cfg.node_count;
    if (cfg.protocol == Protocol::kFrog) s.key.fragment_payload = static_cast<int>(cfg.fragment_payload);
    s.key.priority = p;
    for (const auto& o : outcomes) {
      if (o.ok()) s.replications.push_back(o.by_priority[index_of(p)]);
    }
    result.rows.push_back(make_row(s));
    result.series.push_back(std::move(s));
  }
  for (const auto& o : outcomes) {
    if (!o.ok()) result.failures.push_back(o.fault);
  }
  return result;
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  auto opt = [](const std::optional<double>& v, int decimals) {
    return v ? format_fixed(*v, decimals) : std::string();
  };
  for (const auto& r : rows) {
    os << r.protocol << ',' << r.node_count << ','
       << (r.fragment_payload ? std::to_string(*r.fragment_payload) : std::string()) << ','
       << to_string(r.priority) << ',' << opt(r.mean_delay_ms, 6) << ',' << opt(r.delay_ci_ms, 6) << ','
       << format_fixed(r.throughput_Bps, 4) << ',' << opt(r.throughput_ci_Bps, 4) << ',' << r.delivered << ','
       << r.dropped << ',' << r.collisions << '\n';
  }
}

std::string to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream ss;
  write_csv(ss, rows);
  return ss.str();
}

FigureSweep sweep_figures(const ExperimentConfig& base, std::ostream* progress) {
  FigureSweep sweep;
  auto& fig4a = sweep.tables["fig4a"];
  auto& fig4b = sweep.tables["fig4b"];
  auto& fig5a = sweep.tables["fig5a"];
  auto& fig5b = sweep.tables["fig5b"];

  auto run = [&](Protocol protocol, int nodes, std::uint32_t frag) {
    ExperimentConfig cfg = base;
    cfg.protocol = protocol;
    cfg.node_count = nodes;
    cfg.fragment_payload = frag;
    if (progress) {
      *progress << "running " << to_string(protocol) << " nodes=" << nodes;
      if (protocol == Protocol::kFrog) *progress << " fragment_payload=" << frag;
      *progress << '\n' << std::flush;
    }
    auto res = run_experiment(cfg);
    sweep.failures.insert(sweep.failures.end(), res.failures.begin(), res.failures.end());
    return res.rows;
  };

  for (int n = kSweepMinNodes; n <= kSweepMaxNodes; ++n) {
    const auto bop = run(Protocol::kBop, n, kSweepFragmentA);
    const auto frog_a = run(Protocol::kFrog, n, kSweepFragmentA);
    const auto frog_b = run(Protocol::kFrog, n, kSweepFragmentB);
    for (auto* table : {&fig4a, &fig5a}) {
      table->insert(table->end(), bop.begin(), bop.end());
      table->insert(table->end(), frog_a.begin(), frog_a.end());
    }
    for (auto* table : {&fig4b, &fig5b}) {
      table->insert(table->end(), bop.begin(), bop.end());
      table->insert(table->end(), frog_b.begin(), frog_b.end());
    }
  }
  return sweep;
}

void write_figures(const FigureSweep& sweep, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, rows] : sweep.tables) {
    const auto path = dir / (name + ".csv");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_csv(out, rows);
  }
}

const ResultRow* find_row(const std::vector<ResultRow>& table, std::string_view protocol, int node_count,
                          Priority priority) {
  for (const auto& r : table) {
    if (r.protocol == protocol && r.node_count == node_count && r.priority == priority) return &r;
  }
  return nullptr;
}

std::vector<std::string> check_trends(const FigureSweep& sweep) {
  std::vector<std::string> bad;
  auto row = [&](const std::string& table, std::string_view proto, int n, Priority p) -> const ResultRow* {
    auto it = sweep.tables.find(table);
    const ResultRow* r = it == sweep.tables.end() ? nullptr : find_row(it->second, proto, n, p);
    if (!r) bad.push_back(table + ": missing row " + std::string(proto) + " n=" + std::to_string(n));
    return r;
  };
  auto delay = [](const ResultRow* r) { return r && r->mean_delay_ms ? *r->mean_delay_ms : NAN; };
  auto fail = [&](const std::string& what, double lhs, double rhs) {
    bad.push_back(what + " (" + format_fixed(lhs, 4) + " vs " + format_fixed(rhs, 4) + ")");
  };
  constexpr Priority U = Priority::kUrgent;
  constexpr Priority N = Priority::kNormal;

  for (const std::string t : {"fig4a", "fig4b"}) {
    for (int n = kSweepMinNodes; n <= kSweepMaxNodes; ++n) {
      const double f = delay(row(t, "frog", n, U));
      const double b = delay(row(t, "bop", n, U));
      if (!(f < b)) fail(t + " n=" + std::to_string(n) + ": frog urgent delay not below bop", f, b);
    }
    const double f = delay(row(t, "frog", kSweepMaxNodes, N));
    const double b = delay(row(t, "bop", kSweepMaxNodes, N));
    if (!(f > b)) fail(t + ": frog normal delay not above bop at max nodes", f, b);
  }

  const int m = kSweepMaxNodes;
  {
    const double u2 = delay(row("fig4b", "frog", m, U));
    const double u16 = delay(row("fig4a", "frog", m, U));
    if (!(u2 < u16)) fail("urgent delay frag 2 not below frag 16", u2, u16);
    const double n2 = delay(row("fig4b", "frog", m, N));
    const double n16 = delay(row("fig4a", "frog", m, N));
    if (!(n2 > n16)) fail("normal delay frag 2 not above frag 16", n2, n16);
    const auto* tu2 = row("fig5b", "frog", m, U);
    const auto* tu16 = row("fig5a", "frog", m, U);
    if (tu2 && tu16 && !(tu2->throughput_Bps >= tu16->throughput_Bps)) {
      fail("urgent throughput frag 2 below frag 16", tu2->throughput_Bps, tu16->throughput_Bps);
    }
    const auto* tn2 = row("fig5b", "frog", m, N);
    const auto* tn16 = row("fig5a", "frog", m, N);
    if (tn2 && tn16 && !(tn2->throughput_Bps < tn16->throughput_Bps)) {
      fail("normal throughput frag 2 not below frag 16", tn2->throughput_Bps, tn16->throughput_Bps);
    }
  }

  const std::pair<std::string, std::string> series[] = {{"fig4a", "bop"}, {"fig4a", "frog"}, {"fig4b", "frog"}};
  for (const auto& [t, proto] : series) {
    const std::string label = t + " " + proto;
    for (Priority p : {U, N}) {
      const double lo = delay(row(t, proto, kSweepMinNodes, p));
      const double hi = delay(row(t, proto, m, p));
      if (!(hi > lo)) fail(label + " " + std::string(to_string(p)) + " delay does not grow with nodes", hi, lo);
    }
    const auto* lo = row(t, proto, kSweepMinNodes, N);
    const auto* hi = row(t, proto, m, N);
    if (lo && hi) {
      const double per_lo = lo->throughput_Bps / (kSweepMinNodes - 1);
      const double per_hi = hi->throughput_Bps / (m - 1);
      if (!(per_hi < per_lo)) fail(label + " per-node normal throughput does not decline", per_hi, per_lo);
    }
  }
  return bad;
}

}  // namespace macsim
