#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "macsim/scenario.hpp"

namespace macsim {

/// Configuration of one experiment (all replications of one setting).
/// Field names double as config-file keys.
struct ExperimentConfig {
  Protocol protocol = Protocol::kBop;
  int node_count = 11;
  std::uint32_t fragment_payload = 16;
  Duration duration = std::chrono::seconds{1000};
  int replications = 5;
  std::uint64_t master_seed = 1;
  Duration normal_period = std::chrono::milliseconds{200};
  Duration urgent_mean = std::chrono::seconds{2};
  Duration slot_time = std::chrono::microseconds{320};
  Duration t_int = std::chrono::microseconds{600};
  Duration per_byte_time = std::chrono::microseconds{32};
  int max_retries = 5;
  std::size_t queue_capacity = 50;
  Duration warmup{0};
  bool recontend_after_interrupt = true;
  bool bop_rts_cts = false;
  int jobs = 1;
  std::string output;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
  RunConfig run_config(int replication) const;
};

/// ConfigError that knows which input line caused it (0 = not from a file).
class ConfigParseError : public ConfigError {
 public:
  ConfigParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

/// Names accepted by parse_config and set_field.
const std::vector<std::string_view>& config_keys();

/// Assigns one `key = value` setting. Durations accept ns, us, ms or s
/// suffixes; a bare number means seconds.
void set_field(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Line-oriented `key = value` text with `#` comments. Errors name the line.
/// An empty text yields the defaults.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// Applies MACSIM_SEED from the environment, if set.
void apply_environment(ExperimentConfig& cfg);

struct ResultRow {
  std::string protocol;
  int node_count = 0;
  std::optional<int> fragment_payload;
  Priority priority = Priority::kNormal;
  std::optional<double> mean_delay_ms;
  std::optional<double> delay_ci_ms;
  double throughput_Bps = 0.0;
  std::optional<double> throughput_ci_Bps;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t collisions = 0;
};

ResultRow make_row(const MetricSeries& series);

/// Summary of one replication for both classes, or the fault that stopped it.
struct ReplicationOutcome {
  std::array<ReplicationSummary, kPriorityCount> by_priority{};
  std::string fault;
  bool ok() const { return fault.empty(); }
};

ReplicationOutcome run_replication(const ExperimentConfig& cfg, int replication);

struct ExperimentResult {
  std::vector<MetricSeries> series;  // urgent, normal
  std::vector<ResultRow> rows;       // urgent, normal
  std::vector<std::string> failures;
};

/// Runs cfg.replications runs with seeds master_seed + r, possibly on
/// cfg.jobs threads, and aggregates in replication order.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

inline constexpr std::string_view kCsvHeader =
    "protocol,node_count,fragment_payload,priority,mean_delay_ms,delay_ci_ms,throughput_Bps,"
    "throughput_ci_Bps,delivered,dropped,collisions";

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::string to_csv(const std::vector<ResultRow>& rows);

/// The four figure tables, keyed "fig4a", "fig4b", "fig5a", "fig5b".
struct FigureSweep {
  std::map<std::string, std::vector<ResultRow>> tables;
  std::vector<std::string> failures;
};

inline constexpr int kSweepMinNodes = 2;
inline constexpr int kSweepMaxNodes = 11;
inline constexpr std::uint32_t kSweepFragmentA = 16;
inline constexpr std::uint32_t kSweepFragmentB = 2;

/// Delay and throughput against node count, for BoP and for FROG at
/// fragment sizes 16 (a) and 2 (b). `base` supplies everything but the
/// protocol, node count and fragment size. BoP runs once per node count
/// and feeds both tables.
FigureSweep sweep_figures(const ExperimentConfig& base, std::ostream* progress = nullptr);

/// Writes <dir>/<name>.csv for every table.
void write_figures(const FigureSweep& sweep, const std::filesystem::path& dir);

/// Checks the qualitative trends expected of a sweep. Returns one message
/// per violated comparison; empty means all hold.
std::vector<std::string> check_trends(const FigureSweep& sweep);

/// Finds the row of a table; nullptr if absent.
const ResultRow* find_row(const std::vector<ResultRow>& table, std::string_view protocol, int node_count,
                          Priority priority);

}  // namespace macsim
