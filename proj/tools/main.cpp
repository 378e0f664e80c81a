// macsim: run BoP-MAC / FROG-MAC experiments from the command line.
//
//   macsim run      [--config FILE] [--key value ...]
//   macsim figures  [--config FILE] [--out-dir DIR] [--self-check]
//   macsim trace    [--config FILE] [--replication R] [--trace-out FILE]
//   macsim validate [--config FILE]
//
// Exit codes: 0 ok, 1 configuration error, 2 runtime fault,
// 3 expected trend violated (figures --self-check).

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "macsim/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitFault = 2;
constexpr int kExitTrend = 3;

struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;

  void attach(CLI::App& cmd) {
    cmd.add_option("-c,--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    for (auto key : macsim::config_keys()) {
      const std::string k(key);
      std::string dashed = k;
      for (char& ch : dashed) {
        if (ch == '_') ch = '-';
      }
      const std::string names = dashed == k ? "--" + k : "--" + k + ",--" + dashed;
      cmd.add_option_function<std::string>(
          names, [this, k](const std::string& v) { values[k] = v; }, "override '" + k + "'");
    }
  }

  // Defaults, then the file, then MACSIM_SEED, then explicit flags.
  macsim::ExperimentConfig resolve() const {
    macsim::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = macsim::load_config(config_path);
    macsim::apply_environment(cfg);
    for (const auto& [k, v] : values) {
      try {
        macsim::set_field(cfg, k, v);
      } catch (const macsim::ConfigError& e) {
        throw macsim::ConfigError(std::string("--") + k + ": " + e.what());
      }
    }
    cfg.validate();
    return cfg;
  }
};

int emit_rows(const macsim::ExperimentConfig& cfg, const std::vector<macsim::ResultRow>& rows) {
  if (cfg.output.empty()) {
    macsim::write_csv(std::cout, rows);
    return kExitOk;
  }
  std::ofstream out(cfg.output, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write " << cfg.output << '\n';
    return kExitFault;
  }
  macsim::write_csv(out, rows);
  return kExitOk;
}

int cmd_run(const Overrides& o) {
  const auto cfg = o.resolve();
  const auto result = macsim::run_experiment(cfg);
  for (const auto& f : result.failures) std::cerr << "fault: " << f << '\n';
  const int rc = emit_rows(cfg, result.rows);
  return result.failures.empty() ? rc : kExitFault;
}

int cmd_figures(const Overrides& o, const std::string& out_dir, bool self_check, bool quiet) {
  const auto cfg = o.resolve();
  const auto sweep = macsim::sweep_figures(cfg, quiet ? nullptr : &std::cerr);
  macsim::write_figures(sweep, out_dir);
  for (const auto& f : sweep.failures) std::cerr << "fault: " << f << '\n';
  if (!sweep.failures.empty()) return kExitFault;
  if (self_check) {
    const auto bad = macsim::check_trends(sweep);
    for (const auto& b : bad) std::cerr << "trend violated: " << b << '\n';
    if (!bad.empty()) return kExitTrend;
    if (!quiet) std::cerr << "self-check: all trends hold\n";
  }
  return kExitOk;
}

int cmd_trace(const Overrides& o, int replication, const std::string& trace_out) {
  const auto cfg = o.resolve();
  auto rc = cfg.run_config(replication);
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!trace_out.empty()) {
    file.open(trace_out, std::ios::binary | std::ios::trunc);
    if (!file) {
      std::cerr << "error: cannot write " << trace_out << '\n';
      return kExitFault;
    }
    os = &file;
  }
  rc.trace = os;
  const auto result = macsim::run_once(rc);
  std::cerr << "dispatched " << result.events << " events\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BoP-MAC / FROG-MAC star-network simulator"};
  app.require_subcommand(1);

  Overrides run_o, fig_o, trace_o, val_o;

  auto* run = app.add_subcommand("run", "run one configuration and print its CSV rows");
  run_o.attach(*run);

  std::string out_dir = "figures";
  bool self_check = false;
  bool quiet = false;
  auto* figures = app.add_subcommand("figures", "sweep node counts 2..11 and write fig4a/4b/5a/5b CSVs");
  fig_o.attach(*figures);
  figures->add_option("-o,--out-dir", out_dir, "directory for the CSV files");
  figures->add_flag("--self-check", self_check, "exit 3 if an expected trend does not hold");
  figures->add_flag("-q,--quiet", quiet, "no progress output");

  int replication = 0;
  std::string trace_out;
  auto* trace = app.add_subcommand("trace", "single run, dump every dispatched event");
  trace_o.attach(*trace);
  trace->add_option("-r,--replication", replication, "replication index (seed = master_seed + r)")
      ->check(CLI::NonNegativeNumber);
  trace->add_option("-t,--trace-out", trace_out, "trace file (default stdout)");

  auto* validate = app.add_subcommand("validate", "check a configuration and exit");
  val_o.attach(*validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(run_o);
    if (figures->parsed()) return cmd_figures(fig_o, out_dir, self_check, quiet);
    if (trace->parsed()) return cmd_trace(trace_o, replication, trace_out);
    if (validate->parsed()) {
      val_o.resolve();
      std::cout << "ok\n";
      return kExitOk;
    }
  } catch (const macsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const macsim::SimulationFault& e) {
    std::cerr << "simulation fault: " << e.what() << '\n';
    return kExitFault;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFault;
  }
  return kExitOk;
}
