#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mimosd/linalg.hpp"
#include "mimosd/linear.hpp"
#include "mimosd/model.hpp"
#include "mimosd/parallel.hpp"
#include "mimosd/report.hpp"
#include "mimosd/search.hpp"

namespace mimosd {

class TraceRecorder;

enum class DecoderKind { Linear, Sd, PlSd, Psd, Kbest, SdKbest, Ml };

/// Decoder selection, written as name[:key=value,...]:
///   mrc | zf | mmse | ml
///   sd[:strategy=bfs|dfs|bestfs,j=J]
///   plsd[:threads=T,batch=B]
///   psd[:workers=W,balancing=static|dynamic,j=J]
///   kbest[:k=K]
///   sdkbest[:k=K,workers=W,eps=E]
/// ';' is accepted in place of ','. Thread and worker counts left at 0 take the
/// campaign-wide value.
struct DecoderSpec {
  DecoderKind kind = DecoderKind::Sd;
  LinearKind linear = LinearKind::MMSE;
  Strategy strategy = Strategy::BestFS;
  int group = 1;
  int threads = 0;
  int batch = 20;
  Balancing balancing = Balancing::Dynamic;
  int k = 10;
  double eps = 0.05;

  static DecoderSpec parse(std::string_view text);  // throws ConfigError
  // Canonical label with ';' separators, used as the CSV decoder column.
  std::string label() const;
  bool is_tree() const { return kind != DecoderKind::Linear; }
  bool is_parallel() const {
    return kind == DecoderKind::PlSd || kind == DecoderKind::Psd || kind == DecoderKind::SdKbest;
  }
  // Decoders that may run several trials at once.
  bool trial_parallel_safe() const {
    return kind == DecoderKind::Linear || kind == DecoderKind::Kbest;
  }
};

/// Runs one decoder on one instance. Tree decoders include QR preprocessing in
/// elapsed_s. `threads` fills counts the spec leaves at 0.
DetectionReport run_decoder(const DecoderSpec& spec, const MimoInstance& instance,
                            const RadiusPolicy& radius, int threads,
                            TraceRecorder* trace = nullptr);

RadiusPolicy parse_radius(std::string_view text);  // formula | inf | <squared radius>
std::string to_string(const RadiusPolicy& policy);

// "a:b:step" (inclusive), "a,b,c" or a single value.
std::vector<double> parse_snr_grid(std::string_view text);

enum class ErasurePolicy { Errors, MmseFallback };

std::string_view to_string(ErasurePolicy p);
ErasurePolicy parse_erasure(std::string_view text);

struct CampaignConfig {
  int n_tx = 4;
  int n_rx = 4;
  Modulation modulation = Modulation::QPSK;
  std::vector<double> snr_db;
  int trials = 100;
  std::vector<DecoderSpec> decoders;
  RadiusPolicy radius = RadiusPolicy::formula();
  int threads = 1;
  std::uint64_t seed = 1;
  ErasurePolicy erasure = ErasurePolicy::Errors;
  bool trial_parallel = false;  // honored only when every decoder is trial_parallel_safe

  void validate() const;  // throws ConfigError naming the bad field
};

struct MetricRow {
  double snr_db = 0.0;
  std::string decoder;
  double ser = 0.0;
  double ber = 0.0;
  double erasure_rate = 0.0;
  double mean_visited = 0.0;
  std::uint64_t max_visited = 0;
  double mean_pd = 0.0;
  std::uint64_t max_pd = 0;
  std::uint64_t trials = 0;
  double mean_time_s = 0.0;  // timing group; excluded from reproducibility checks
};

struct MetricTable {
  std::map<std::string, std::string> tags;  // from the schema line
  std::vector<MetricRow> rows;
};

inline constexpr std::string_view kCsvSchema = "mimosd-metrics/1";

/// Monte Carlo campaign: for every snr point and trial, one seeded instance
/// decoded by every decoder in turn. Per-trial seeds are
/// derive_seed(seed, snr index, trial index). When `trace_first` is non-empty,
/// trial 0 of the first snr point is traced for each tree decoder and the
/// traces are stored there in decoder order.
MetricTable run_campaign(const CampaignConfig& config, std::ostream* summary = nullptr,
                         std::vector<std::pair<std::string, std::string>>* trace_first = nullptr);

void write_csv(std::ostream& out, const MetricTable& table);
MetricTable read_csv(std::istream& in);  // throws ConfigError
MetricTable read_csv_file(const std::string& path);  // throws IoError / ConfigError
void write_csv_file(const std::string& path, const MetricTable& table);  // throws IoError

struct CompareRow {
  double snr_db = 0.0;
  std::string decoder_a;
  std::string decoder_b;
  double d_ser = 0.0;  // a - b
  double d_ber = 0.0;
  double d_erasure = 0.0;
  double d_visited = 0.0;
  double d_pd = 0.0;
  char ser_winner = '=';  // 'A', 'B' or '='
  char visited_winner = '=';
};

/// Pairs rows of two campaigns over the same grid (tx, rx, mod and snr set
/// must match, else GridMismatchError) by snr and position within the snr
/// point. Lower is better for every verdict.
std::vector<CompareRow> compare_report(const MetricTable& a, const MetricTable& b);
void write_compare(std::ostream& out, const std::vector<CompareRow>& rows);

}  // namespace mimosd
