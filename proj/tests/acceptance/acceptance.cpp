// Acceptance suite: one PASS/FAIL line per criterion.
//
//   macsim_acceptance            exit 1 if any criterion fails
//   macsim_acceptance --report   always exit 0 once every line is printed
//
// MACSIM_SEED changes the master seed of the sweeps.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "macsim/experiment.hpp"

using namespace macsim;
using namespace std::chrono_literals;

namespace {

struct Verdict {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      notes.push_back(what);
    }
  }
};

std::string fmt(double v, int decimals = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

void report(int n, const std::string& title, const Verdict& v, const std::string& detail = {}) {
  std::cout << "criterion " << n << ": " << (v.pass ? "PASS" : "FAIL") << " - " << title;
  if (!detail.empty()) std::cout << " [" << detail << "]";
  std::cout << '\n';
  for (const auto& note : v.notes) std::cout << "    " << note << '\n';
  std::cout << std::flush;
}

double delay_of(const FigureSweep& s, const std::string& table, std::string_view proto, int n, Priority p) {
  const auto* r = find_row(s.tables.at(table), proto, n, p);
  return r && r->mean_delay_ms ? *r->mean_delay_ms : NAN;
}

double thr_of(const FigureSweep& s, const std::string& table, std::string_view proto, int n, Priority p) {
  const auto* r = find_row(s.tables.at(table), proto, n, p);
  return r ? r->throughput_Bps : NAN;
}

constexpr Priority kU = Priority::kUrgent;
constexpr Priority kN = Priority::kNormal;

Verdict criterion1(const FigureSweep& s) {
  Verdict v;
  for (const std::string t : {"fig4a", "fig4b"}) {
    for (int n = 2; n <= 11; ++n) {
      const double f = delay_of(s, t, "frog", n, kU);
      const double b = delay_of(s, t, "bop", n, kU);
      v.require(f < b, t + " n=" + std::to_string(n) + ": frog urgent " + fmt(f) + " ms vs bop " + fmt(b) + " ms");
    }
  }
  return v;
}

Verdict criterion2(const FigureSweep& s) {
  Verdict v;
  for (const std::string t : {"fig4a", "fig4b"}) {
    const double f = delay_of(s, t, "frog", 11, kN);
    const double b = delay_of(s, t, "bop", 11, kN);
    v.require(f > b, t + ": frog normal " + fmt(f) + " ms vs bop " + fmt(b) + " ms");
  }
  return v;
}

Verdict criterion3(const FigureSweep& s) {
  Verdict v;
  const double u2 = delay_of(s, "fig4b", "frog", 11, kU), u16 = delay_of(s, "fig4a", "frog", 11, kU);
  const double n2 = delay_of(s, "fig4b", "frog", 11, kN), n16 = delay_of(s, "fig4a", "frog", 11, kN);
  const double tu2 = thr_of(s, "fig5b", "frog", 11, kU), tu16 = thr_of(s, "fig5a", "frog", 11, kU);
  const double tn2 = thr_of(s, "fig5b", "frog", 11, kN), tn16 = thr_of(s, "fig5a", "frog", 11, kN);
  v.require(u2 < u16, "urgent delay frag2 " + fmt(u2) + " !< frag16 " + fmt(u16));
  v.require(n2 > n16, "normal delay frag2 " + fmt(n2) + " !> frag16 " + fmt(n16));
  v.require(tu2 >= tu16, "urgent throughput frag2 " + fmt(tu2) + " !>= frag16 " + fmt(tu16));
  v.require(tn2 < tn16, "normal throughput frag2 " + fmt(tn2) + " !< frag16 " + fmt(tn16));
  return v;
}

Verdict criterion4(const FigureSweep& s) {
  Verdict v;
  const std::pair<std::string, std::string> series[] = {{"fig4a", "bop"}, {"fig4a", "frog"}, {"fig4b", "frog"}};
  for (const auto& [t, proto] : series) {
    const std::string label = proto == "bop" ? "bop" : proto + (t == "fig4a" ? "/16" : "/2");
    for (Priority p : {kU, kN}) {
      const double lo = delay_of(s, t, proto, 2, p), hi = delay_of(s, t, proto, 11, p);
      v.require(hi > lo, label + " " + std::string(to_string(p)) + " delay n=11 " + fmt(hi) + " !> n=2 " + fmt(lo));
    }
    const double lo = thr_of(s, t, proto, 2, kN) / 1.0;
    const double hi = thr_of(s, t, proto, 11, kN) / 10.0;
    v.require(hi < lo, label + " per-node normal throughput n=11 " + fmt(hi) + " !< n=2 " + fmt(lo));
  }
  return v;
}

Verdict criterion6() {
  Verdict v;
  v.require(fragment_count(121, 2) == 61, "fragment_count(121, 2) = " + std::to_string(fragment_count(121, 2)));
  v.require(fragment_count(121, 121) == 1, "fragment_count(121, 121) = " + std::to_string(fragment_count(121, 121)));
  return v;
}

Verdict criterion7(std::string& detail) {
  Verdict v;
  // BoP: one source, normal CBR only.
  RunConfig rc;
  rc.node_count = 2;
  rc.duration = 200s;
  rc.generators = {GeneratorSpec::default_normal()};
  rc.record_backoff = true;
  const auto bop = run_once(rc);
  const auto& samples = bop.metrics.samples();
  v.require(samples.size() == bop.backoffs.size() && !samples.empty(), "BoP: one draw per delivered packet expected");
  std::size_t bop_ok = 0;
  for (std::size_t i = 0; i < std::min(samples.size(), bop.backoffs.size()); ++i) {
    // d x 320 us + 127 x 32 us + 5 x 32 us, in ns.
    const long long oracle = bop.backoffs[i].slots * 320'000LL + 4'064'000LL + 160'000LL;
    if (to_ns(kSimStart + samples[i].delay()) == oracle) {
      ++bop_ok;
    } else if (v.notes.size() < 5) {
      v.require(false, "BoP packet " + std::to_string(i) + ": delay " + std::to_string(samples[i].delay().count()) +
                           " ns, oracle " + std::to_string(oracle) + " ns");
    }
  }
  v.require(bop_ok == samples.size(), "BoP: " + std::to_string(samples.size() - bop_ok) + " packets off the closed form");

  // FROG at 16-byte fragments: per-packet channel hold.
  rc.protocol = Protocol::kFrog;
  rc.fragment_payload = 16;
  rc.record_backoff = false;
  rc.record_frames = true;
  const auto frog = run_once(rc);
  // RTS 5 + CTS 5 + 7 x 22 + 15 + SACK 6 bytes at 32 us, plus 7 x 0.6 ms.
  const long long hold_oracle = (5 + 5 + 7 * 22 + 15 + 6) * 32'000LL + 7 * 600'000LL;
  std::map<std::uint64_t, std::pair<SimTime, SimTime>> span;
  for (const auto& f : frog.frames) {
    auto [it, fresh] = span.try_emplace(f.frame.packet_id, f.start, f.end);
    if (!fresh) it->second.second = std::max(it->second.second, f.end);
    v.require(!f.collided, "FROG: collision in a single-source run");
  }
  std::size_t frog_ok = 0;
  for (const auto& [id, se] : span) {
    frog_ok += (se.second - se.first).count() == hold_oracle;
  }
  v.require(frog_ok == span.size() && !span.empty(),
            "FROG: " + std::to_string(span.size() - frog_ok) + " packets off " + std::to_string(hold_oracle) + " ns");
  detail = "BoP " + std::to_string(bop_ok) + "/" + std::to_string(samples.size()) + " exact, FROG/16 " +
           std::to_string(frog_ok) + "/" + std::to_string(span.size()) + " exact at " + std::to_string(hold_oracle) +
           " ns";
  return v;
}

Verdict criterion8(const FigureSweep& first, const FigureSweep& second, std::string& detail) {
  Verdict v;
  const auto root = std::filesystem::temp_directory_path() / "macsim_acceptance";
  write_figures(first, root / "a");
  write_figures(second, root / "b");
  std::size_t bytes = 0;
  for (const auto& [name, rows] : first.tables) {
    auto slurp = [](const std::filesystem::path& p) {
      std::ifstream in(p, std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      return ss.str();
    };
    const auto a = slurp(root / "a" / (name + ".csv"));
    const auto b = slurp(root / "b" / (name + ".csv"));
    v.require(!a.empty() && a == b, name + ".csv differs between executions");
    bytes += a.size();
  }
  std::filesystem::remove_all(root);
  detail = std::to_string(first.tables.size()) + " files, " + std::to_string(bytes) + " bytes compared";
  return v;
}

Verdict criterion9(std::string& detail) {
  Verdict v;
  const std::vector<double> xs{1, 2, 3, 4, 5};
  const auto ci = ci95(xs);
  v.require(ci.half_width && std::abs(*ci.half_width - 1.963) <= 0.001,
            "ci95({1..5}) half-width " + (ci.half_width ? fmt(*ci.half_width, 6) : std::string("absent")));

  Simulator sim;
  std::uint64_t id = 0;
  std::map<NodeId, std::vector<SimTime>> arrivals;
  std::vector<std::unique_ptr<ArrivalProcess>> procs;
  for (NodeId node = 1; node <= 10; ++node) {
    procs.push_back(std::make_unique<ArrivalProcess>(
        sim, node, GeneratorSpec::default_urgent(), 1, [&] { return ++id; },
        [&, node](const Packet& p) { arrivals[node].push_back(p.generated_at); }));
    procs.back()->start();
  }
  sim.run_until(at(1000s));
  double sum = 0;
  std::size_t gaps = 0;
  for (const auto& [node, ts] : arrivals) {
    SimTime prev = kSimStart;
    for (SimTime t : ts) {
      sum += to_seconds(t - prev);
      prev = t;
      ++gaps;
    }
  }
  const double mean = gaps ? sum / static_cast<double>(gaps) : 0.0;
  v.require(gaps >= 500, "only " + std::to_string(gaps) + " inter-arrivals");
  v.require(mean >= 1.8 && mean <= 2.2, "Poisson mean " + fmt(mean) + " s outside [1.8, 2.2]");
  detail = "half-width " + (ci.half_width ? fmt(*ci.half_width, 6) : std::string("-")) + ", Poisson mean " +
           fmt(mean) + " s over " + std::to_string(gaps) + " gaps";
  return v;
}

// Runs every sweep configuration once more with frame logging and checks the
// per-run invariants (criterion 10) and, on BoP runs, non-preemption (5).
void run_invariant_pass(const ExperimentConfig& base, Verdict& v5, Verdict& v10, std::string& d5,
                        std::string& d10) {
  std::size_t runs = 0, bop_runs = 0, urgent_checked = 0, simultaneous = 0;
  double max_thr = 0;
  for (int n = 2; n <= 11; ++n) {
    for (auto [proto, frag] : {std::pair{Protocol::kBop, 16u}, {Protocol::kFrog, 16u}, {Protocol::kFrog, 2u}}) {
      for (int r = 0; r < base.replications; ++r) {
        ExperimentConfig cfg = base;
        cfg.protocol = proto;
        cfg.node_count = n;
        cfg.fragment_payload = frag;
        RunConfig rc = cfg.run_config(r);
        rc.record_frames = true;
        Scenario sc(rc);
        const auto res = sc.run();
        ++runs;
        const std::string tag = std::string(to_string(proto)) + (proto == Protocol::kFrog ? "/" + std::to_string(frag) : "") +
                                " n=" + std::to_string(n) + " rep=" + std::to_string(r);

        for (NodeId id = 1; id < n; ++id) {
          for (Priority p : {kU, kN}) {
            const auto& c = res.metrics.counters(id, p);
            const auto residual = sc.node(id).queues().size(p);
            v10.require(c.generated == c.delivered + c.dropped() + residual,
                        tag + " node " + std::to_string(id) + " " + std::string(to_string(p)) + ": conservation");
          }
        }
        SimTime last_end = kSimStart;
        for (const auto& f : res.frames) {
          if (f.collided) continue;
          v10.require(f.start >= last_end, tag + ": delivered frames overlap at " + std::to_string(to_ns(f.start)));
          last_end = f.end;
        }
        const double thr = res.throughput_Bps(kU) + res.throughput_Bps(kN);
        max_thr = std::max(max_thr, thr);
        v10.require(thr <= 31250.0, tag + ": aggregate throughput " + fmt(thr));

        if (proto == Protocol::kBop) {
          ++bop_runs;
          std::vector<const TxRecord*> normal_data;
          for (const auto& f : res.frames) {
            if (f.frame.kind == FrameKind::kData && f.frame.priority == kN) normal_data.push_back(&f);
          }
          std::size_t j = 0;
          for (const auto& f : res.frames) {
            if (f.frame.priority != kU) continue;
            ++urgent_checked;
            while (j < normal_data.size() && normal_data[j]->end <= f.start) ++j;
            for (std::size_t k = j; k < normal_data.size() && normal_data[k]->start <= f.start; ++k) {
              if (normal_data[k]->start == f.start) {
                ++simultaneous;  // same-instant start: a collision, not a pre-emption
              } else {
                v5.require(false, tag + ": urgent frame at " + std::to_string(to_ns(f.start)) + " ns inside normal DATA");
              }
            }
          }
        }
      }
    }
  }
  if (v10.notes.size() > 20) v10.notes.resize(20);
  if (v5.notes.size() > 20) v5.notes.resize(20);
  d5 = std::to_string(bop_runs) + " BoP traces, " + std::to_string(urgent_checked) + " urgent frames, " +
       std::to_string(simultaneous) + " same-instant starts (collisions)";
  d10 = std::to_string(runs) + " runs, max aggregate throughput " + fmt(max_thr, 2) + " B/s";
}

}  // namespace

int main(int argc, char** argv) {
  const bool report_only = argc > 1 && std::strcmp(argv[1], "--report") == 0;

  ExperimentConfig base;  // defaults: 1000 s, 5 replications
  apply_environment(base);
  std::cout << "master seed " << base.master_seed << ", " << base.replications << " replications of "
            << to_seconds(base.duration) << " s\n"
            << std::flush;

  const auto sweep = sweep_figures(base);
  for (const auto& f : sweep.failures) std::cout << "fault: " << f << '\n';

  int failed = 0;
  auto tally = [&](const Verdict& v) { failed += v.pass ? 0 : 1; };

  Verdict v1 = criterion1(sweep);
  report(1, "FROG urgent delay below BoP at every node count, both fragment sizes", v1);
  tally(v1);
  Verdict v2 = criterion2(sweep);
  report(2, "FROG normal delay above BoP at 11 nodes, both fragment sizes", v2);
  tally(v2);
  Verdict v3 = criterion3(sweep);
  report(3, "fragment size 2 vs 16 at 11 nodes: delay and throughput trade-off", v3);
  tally(v3);
  Verdict v4 = criterion4(sweep);
  report(4, "delay grows and per-node normal throughput falls from 2 to 11 nodes", v4);
  tally(v4);

  Verdict v5, v10;
  std::string d5, d10;
  run_invariant_pass(base, v5, v10, d5, d10);
  report(5, "BoP never starts an urgent frame inside a normal DATA frame", v5, d5);
  tally(v5);

  Verdict v6 = criterion6();
  report(6, "fragment_count(121, 2) = 61 and fragment_count(121, 121) = 1", v6);
  tally(v6);

  std::string d7;
  Verdict v7 = criterion7(d7);
  report(7, "single-source closed forms (BoP delay, FROG/16 channel hold)", v7, d7);
  tally(v7);

  const auto again = sweep_figures(base);
  std::string d8;
  Verdict v8 = criterion8(sweep, again, d8);
  report(8, "two figure sweeps with the same seed give byte-identical CSVs", v8, d8);
  tally(v8);

  std::string d9;
  Verdict v9 = criterion9(d9);
  report(9, "ci95 half-width and Poisson generator mean", v9, d9);
  tally(v9);

  report(10, "conservation, disjoint delivered airtime, throughput within capacity", v10, d10);
  tally(v10);

  std::cout << (10 - failed) << "/10 criteria pass\n";
  if (!sweep.failures.empty()) return 2;
  return report_only || failed == 0 ? 0 : 1;
}
