// mimosd command line: simulate, compare, audit.
//
// Exit codes: 0 success, 1 audit found violations, 2 configuration error,
// 3 I/O error.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mimosd/errors.hpp"
#include "mimosd/harness.hpp"
#include "mimosd/linalg.hpp"
#include "mimosd/oracle.hpp"
#include "mimosd/trace.hpp"

namespace {

constexpr int kConfigExit = 2;
constexpr int kIoExit = 3;

struct SimulateArgs {
  int tx = 4;
  int rx = 4;
  std::string mod = "qpsk";
  std::string snr = "0:20:4";
  int trials = 100;
  std::vector<std::string> decoders;
  std::string radius = "formula";
  int threads = 1;
  std::uint64_t seed = 1;
  std::string out;
  std::string trace;
  std::string erasure = "errors";
  bool trial_parallel = false;
};

int simulate(const SimulateArgs& a) {
  mimosd::CampaignConfig cfg;
  cfg.n_tx = a.tx;
  cfg.n_rx = a.rx;
  cfg.modulation = mimosd::parse_modulation(a.mod);
  cfg.snr_db = mimosd::parse_snr_grid(a.snr);
  cfg.trials = a.trials;
  for (const auto& d : a.decoders) cfg.decoders.push_back(mimosd::DecoderSpec::parse(d));
  cfg.radius = mimosd::parse_radius(a.radius);
  cfg.threads = a.threads;
  cfg.seed = a.seed;
  cfg.erasure = mimosd::parse_erasure(a.erasure);
  cfg.trial_parallel = a.trial_parallel;
  cfg.validate();

  std::vector<std::pair<std::string, std::string>> traces;
  const auto table = mimosd::run_campaign(cfg, &std::cout, a.trace.empty() ? nullptr : &traces);
  mimosd::write_csv_file(a.out, table);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const std::string path = i == 0 ? a.trace : a.trace + "." + std::to_string(i);
    std::ofstream f(path);
    if (!f) throw mimosd::IoError("cannot open '" + path + "' for writing");
    f << traces[i].second;
    std::cout << "trace of " << traces[i].first << " -> " << path << '\n';
  }
  return 0;
}

int compare(const std::string& a, const std::string& b) {
  const auto ta = mimosd::read_csv_file(a);
  const auto tb = mimosd::read_csv_file(b);
  mimosd::write_compare(std::cout, mimosd::compare_report(ta, tb));
  return 0;
}

// Replays a trace against the structural rules that need no channel data.
int audit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mimosd::IoError("cannot open '" + path + "' for reading");
  const auto trace = mimosd::parse_trace(in);
  // A stand-in problem with the trace's shape; verify_trace only reads M and
  // the alphabet size from it.
  mimosd::Modulation mod;
  switch (trace.omega) {
    case 2: mod = mimosd::Modulation::BPSK; break;
    case 4: mod = mimosd::Modulation::QPSK; break;
    case 16: mod = mimosd::Modulation::QAM16; break;
    case 64: mod = mimosd::Modulation::QAM64; break;
    default: throw mimosd::ConfigError("trace: unsupported alphabet size");
  }
  const auto problem = mimosd::make_problem(
      Eigen::MatrixXcd::Identity(trace.n_tx, trace.n_tx), Eigen::VectorXcd::Zero(trace.n_tx),
      mimosd::make_constellation(mod), std::numeric_limits<double>::infinity());
  const auto verdict = mimosd::verify_trace(trace, problem);
  for (const auto& v : verdict.violations) std::cout << v << '\n';
  std::cout << trace.events.size() << " events, " << verdict.violations.size()
            << " violations\n";
  return verdict.ok() ? 0 : 1;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

// Appends the entries of `simulate --config FILE` for every flag the command
// line does not already set. Throws CLI::FileError when the file is missing.
void merge_config_file(std::vector<std::string>& args) {
  if (args.empty() || args[0] != "simulate") return;
  std::string path;
  for (std::size_t i = 1; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return;
  std::vector<std::string> extra;
  for (const auto& item : CLI::ConfigINI().from_file(path)) {
    const std::string flag = "--" + item.name;
    if (item.name == "config" || has_flag(args, flag)) continue;
    for (const auto& v : item.inputs) extra.push_back(flag + "=" + v);
  }
  args.insert(args.end(), extra.begin(), extra.end());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO sphere-decoding simulator"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Monte Carlo campaign over an SNR grid");
  std::string config_path;
  s->add_option("--config", config_path, "flat key=value file mirroring the flags (flags win)");
  s->add_option("--tx", sim.tx, "transmit antennas M")->capture_default_str();
  s->add_option("--rx", sim.rx, "receive antennas N")->capture_default_str();
  s->add_option("--mod", sim.mod, "bpsk | qpsk | qam16 | qam64")->capture_default_str();
  s->add_option("--snr", sim.snr, "a:b:step, a,b,c or a single value (dB)")->capture_default_str();
  s->add_option("--trials", sim.trials, "trials per snr point")->capture_default_str();
  s->add_option("--decoder", sim.decoders,
                "decoder spec, repeatable: mrc|zf|mmse|ml|sd:strategy=..,j=..|"
                "plsd:threads=..,batch=..|psd:workers=..,balancing=..|kbest:k=..|"
                "sdkbest:k=..,workers=..,eps=..")
      ->required();
  s->add_option("--radius", sim.radius, "formula | inf | squared radius")->capture_default_str();
  s->add_option("--threads", sim.threads, "default thread/worker count")->capture_default_str();
  s->add_option("--seed", sim.seed, "campaign seed")->capture_default_str();
  s->add_option("--out", sim.out, "output CSV")->required();
  s->add_option("--trace", sim.trace,
                "write the trace of trial 0 at the first snr point (FILE, FILE.1, ... per tree "
                "decoder)");
  s->add_option("--erasure", sim.erasure, "errors | mmse-fallback")->capture_default_str();
  s->add_flag("--trial-parallel", sim.trial_parallel,
              "run trials concurrently (linear and kbest decoders only)");

  std::string csv_a, csv_b;
  auto* c = app.add_subcommand("compare", "Per-snr deltas and dominance verdicts of two CSVs");
  c->add_option("a", csv_a, "first CSV")->required();
  c->add_option("b", csv_b, "second CSV")->required();

  std::string trace_path;
  auto* au = app.add_subcommand("audit", "Check a recorded trace for structural violations");
  au->add_option("trace", trace_path, "trace file")->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    merge_config_file(args);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::FileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoExit;
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigExit;
  }

  try {
    if (s->parsed()) return simulate(sim);
    if (c->parsed()) return compare(csv_a, csv_b);
    if (au->parsed()) return audit(trace_path);
  } catch (const mimosd::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIoExit;
  } catch (const mimosd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigExit;
  }
  return 0;
}
