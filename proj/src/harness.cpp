#include "mimosd/harness.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "mimosd/errors.hpp"
#include "mimosd/kbest.hpp"
#include "mimosd/trace.hpp"

namespace mimosd {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int x = std::stoi(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError("decoder option '" + key + "': expected an integer, got '" + v + "'");
}

double parse_double(const std::string& what, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(what + ": expected a number, got '" + v + "'");
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

using Clock = std::chrono::steady_clock;

}  // namespace

DecoderSpec DecoderSpec::parse(std::string_view text) {
  const std::string t = trim(text);
  const auto colon = t.find(':');
  const std::string name = lower(t.substr(0, colon));
  DecoderSpec d;
  std::vector<std::string> allowed;
  if (name == "mrc" || name == "zf" || name == "mmse") {
    d.kind = DecoderKind::Linear;
    d.linear = name == "mrc" ? LinearKind::MRC : name == "zf" ? LinearKind::ZF : LinearKind::MMSE;
  } else if (name == "ml") {
    d.kind = DecoderKind::Ml;
  } else if (name == "sd") {
    d.kind = DecoderKind::Sd;
    allowed = {"strategy", "j"};
  } else if (name == "plsd") {
    d.kind = DecoderKind::PlSd;
    allowed = {"threads", "batch"};
  } else if (name == "psd") {
    d.kind = DecoderKind::Psd;
    allowed = {"workers", "balancing", "j"};
  } else if (name == "kbest") {
    d.kind = DecoderKind::Kbest;
    allowed = {"k"};
  } else if (name == "sdkbest") {
    d.kind = DecoderKind::SdKbest;
    d.k = 8;
    allowed = {"k", "workers", "eps"};
  } else {
    throw ConfigError("unknown decoder '" + name + "'");
  }
  if (colon == std::string::npos) return d;

  std::string opts = t.substr(colon + 1);
  std::replace(opts.begin(), opts.end(), ';', ',');
  std::istringstream in(opts);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("decoder option '" + item + "' lacks '='");
    const std::string key = lower(trim(item.substr(0, eq)));
    const std::string val = trim(item.substr(eq + 1));
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError("decoder '" + name + "' has no option '" + key + "'");
    if (key == "strategy") {
      d.strategy = parse_strategy(val);
    } else if (key == "j") {
      d.group = parse_int(key, val);
    } else if (key == "threads" || key == "workers") {
      d.threads = parse_int(key, val);
    } else if (key == "batch") {
      d.batch = parse_int(key, val);
    } else if (key == "balancing") {
      d.balancing = parse_balancing(val);
    } else if (key == "k") {
      d.k = parse_int(key, val);
    } else if (key == "eps") {
      d.eps = parse_double("decoder option 'eps'", val);
    }
  }
  if (d.group < 1) throw ConfigError("decoder option 'j' must be >= 1");
  if (d.threads < 0) throw ConfigError("thread/worker count must be >= 0");
  if (d.batch < 1) throw ConfigError("decoder option 'batch' must be >= 1");
  if (d.k < 1) throw ConfigError("decoder option 'k' must be >= 1");
  if (!(d.eps >= 0.0)) throw ConfigError("decoder option 'eps' must be >= 0");
  return d;
}

std::string DecoderSpec::label() const {
  std::ostringstream os;
  auto count = [&](const char* key) {
    if (threads > 0) os << ';' << key << '=' << threads;
  };
  switch (kind) {
    case DecoderKind::Linear: return std::string(to_string(linear));
    case DecoderKind::Ml: return "ml";
    case DecoderKind::Sd:
      os << "sd:strategy=" << to_string(strategy) << ";j=" << group;
      break;
    case DecoderKind::PlSd:
      os << "plsd:batch=" << batch;
      count("threads");
      break;
    case DecoderKind::Psd:
      os << "psd:balancing=" << to_string(balancing) << ";j=" << group;
      count("workers");
      break;
    case DecoderKind::Kbest:
      os << "kbest:k=" << k;
      break;
    case DecoderKind::SdKbest:
      os << "sdkbest:k=" << k << ";eps=" << format_real(eps);
      count("workers");
      break;
  }
  return os.str();
}

DetectionReport run_decoder(const DecoderSpec& spec, const MimoInstance& instance,
                            const RadiusPolicy& radius, int threads, TraceRecorder* trace) {
  if (spec.kind == DecoderKind::Linear) return linear_decode(instance, spec.linear);
  const auto t0 = Clock::now();
  const int n = spec.threads > 0 ? spec.threads : std::max(1, threads);
  const PreprocessedProblem problem = preprocess(instance, radius);
  DetectionReport rep;
  switch (spec.kind) {
    case DecoderKind::Ml: rep = ml_bruteforce(problem); break;
    case DecoderKind::Sd: rep = sd_decode(problem, SdOptions{spec.strategy, spec.group, trace}); break;
    case DecoderKind::PlSd: rep = pl_sd_decode(problem, n, spec.batch, trace); break;
    case DecoderKind::Psd:
      rep = psd_decode(problem, PsdConfig{n, spec.balancing, spec.group}, trace);
      break;
    case DecoderKind::Kbest: rep = kbest_decode(problem, spec.k, trace); break;
    case DecoderKind::SdKbest:
      rep = sd_kbest_decode(problem, KbestConfig{spec.k, spec.eps, n}, trace);
      break;
    case DecoderKind::Linear: break;
  }
  rep.elapsed_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

RadiusPolicy parse_radius(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "formula") return RadiusPolicy::formula();
  if (t == "inf" || t == "infinite") return RadiusPolicy::infinite();
  const double v = parse_double("--radius", t);
  if (!(v > 0.0)) throw ConfigError("--radius: squared radius must be positive");
  return RadiusPolicy::explicit_sq(v);
}

std::string to_string(const RadiusPolicy& policy) {
  switch (policy.kind) {
    case RadiusPolicy::Kind::Formula: return "formula";
    case RadiusPolicy::Kind::Infinite: return "inf";
    case RadiusPolicy::Kind::Explicit: return format_real(policy.value);
  }
  return "?";
}

std::vector<double> parse_snr_grid(std::string_view text) {
  const std::string t = trim(text);
  std::vector<double> grid;
  if (t.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::istringstream in(t);
    std::string p;
    while (std::getline(in, p, ':')) parts.push_back(parse_double("--snr", trim(p)));
    if (parts.size() != 3) throw ConfigError("--snr: expected a:b:step");
    const double a = parts[0], b = parts[1], step = parts[2];
    if (!(step > 0.0)) throw ConfigError("--snr: step must be positive");
    if (b < a) throw ConfigError("--snr: end below start");
    const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(a + static_cast<double>(i) * step);
  } else {
    std::istringstream in(t);
    std::string p;
    while (std::getline(in, p, ',')) {
      p = trim(p);
      if (!p.empty()) grid.push_back(lower(p) == "inf" ? std::numeric_limits<double>::infinity()
                                                       : parse_double("--snr", p));
    }
  }
  if (grid.empty()) throw ConfigError("--snr: empty grid");
  return grid;
}

std::string_view to_string(ErasurePolicy p) {
  return p == ErasurePolicy::Errors ? "errors" : "mmse-fallback";
}

ErasurePolicy parse_erasure(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "errors") return ErasurePolicy::Errors;
  if (t == "mmse-fallback") return ErasurePolicy::MmseFallback;
  throw ConfigError("--erasure: expected errors or mmse-fallback, got '" + std::string(text) + "'");
}

void CampaignConfig::validate() const {
  if (n_tx < 1) throw ConfigError("--tx must be >= 1");
  if (n_rx < n_tx) throw ConfigError("--rx must be >= --tx");
  if (snr_db.empty()) throw ConfigError("--snr: empty grid");
  if (trials < 1) throw ConfigError("--trials must be >= 1");
  if (decoders.empty()) throw ConfigError("--decoder: at least one decoder required");
  if (threads < 1) throw ConfigError("--threads must be >= 1");
  if (n_tx > 255) throw ConfigError("--tx above 255 is not supported");
  for (const auto& d : decoders)
    if (d.kind == DecoderKind::Ml &&
        std::pow(static_cast<double>(make_constellation(modulation).size()), n_tx) >
            static_cast<double>(kDefaultMlCap))
      throw ConfigError("decoder 'ml': search space above the brute-force cap");
}

namespace {

struct Outcome {
  std::uint32_t symbol_errors = 0;
  std::uint32_t bit_errors = 0;
  bool erased = false;
  std::uint64_t visited = 0;
  std::uint64_t pd_calcs = 0;
  double time_s = 0.0;
};

Outcome score(const DetectionReport& rep, const MimoInstance& inst, ErasurePolicy erasure) {
  Outcome o;
  o.visited = rep.visited_nodes;
  o.pd_calcs = rep.pd_calcs;
  o.time_s = rep.elapsed_s;
  const auto& c = inst.constellation;
  const SymbolVector* decoded = &rep.decoded;
  DetectionReport fallback;
  if (rep.erased()) {
    o.erased = true;
    if (erasure == ErasurePolicy::Errors) {
      o.symbol_errors = static_cast<std::uint32_t>(inst.n_tx);
      o.bit_errors = static_cast<std::uint32_t>(inst.n_tx * c.bits_per_symbol);
      return o;
    }
    fallback = linear_decode(inst, LinearKind::MMSE);
    decoded = &fallback.decoded;
  }
  for (int i = 0; i < inst.n_tx; ++i) {
    const Symbol a = (*decoded)[static_cast<std::size_t>(i)];
    const Symbol b = inst.s_true[static_cast<std::size_t>(i)];
    if (a != b) {
      ++o.symbol_errors;
      o.bit_errors += static_cast<std::uint32_t>(c.bit_errors(a, b));
    }
  }
  return o;
}

}  // namespace

MetricTable run_campaign(const CampaignConfig& config, std::ostream* summary,
                         std::vector<std::pair<std::string, std::string>>* trace_first) {
  config.validate();
  const Constellation c = make_constellation(config.modulation);
  const std::size_t nd = config.decoders.size();
  const auto trials = static_cast<std::size_t>(config.trials);
  const bool trial_parallel =
      config.trial_parallel &&
      std::all_of(config.decoders.begin(), config.decoders.end(),
                  [](const DecoderSpec& d) { return d.trial_parallel_safe(); });

  MetricTable table;
  table.tags = {{"schema", std::string(kCsvSchema)},
                {"tx", std::to_string(config.n_tx)},
                {"rx", std::to_string(config.n_rx)},
                {"mod", std::string(to_string(config.modulation))},
                {"seed", std::to_string(config.seed)},
                {"radius", to_string(config.radius)},
                {"erasure", std::string(to_string(config.erasure))}};

  std::vector<Outcome> outcomes(trials * nd);
  for (std::size_t si = 0; si < config.snr_db.size(); ++si) {
    const double snr = config.snr_db[si];
    auto one_trial = [&](std::size_t t) {
      Rng rng(derive_seed(config.seed, si, t));
      const MimoInstance inst = generate_instance(config.n_tx, config.n_rx, c, snr, rng);
      for (std::size_t d = 0; d < nd; ++d) {
        const DecoderSpec& spec = config.decoders[d];
        std::unique_ptr<TraceRecorder> rec;
        if (trace_first && si == 0 && t == 0 && spec.is_tree() &&
            spec.kind != DecoderKind::Ml)
          rec = std::make_unique<TraceRecorder>(config.n_tx, static_cast<int>(c.size()),
                                                spec.kind == DecoderKind::Sd ||
                                                        spec.kind == DecoderKind::Psd
                                                    ? spec.group
                                                    : 1);
        const DetectionReport rep = run_decoder(spec, inst, config.radius, config.threads, rec.get());
        outcomes[t * nd + d] = score(rep, inst, config.erasure);
        if (rec) trace_first->emplace_back(spec.label(), dump_trace(rec->merged()));
      }
    };
    if (trial_parallel) {
#pragma omp parallel for num_threads(config.threads) schedule(dynamic, 16)
      for (long t = 0; t < static_cast<long>(trials); ++t) one_trial(static_cast<std::size_t>(t));
    } else {
      for (std::size_t t = 0; t < trials; ++t) one_trial(t);
    }

    for (std::size_t d = 0; d < nd; ++d) {
      MetricRow row;
      row.snr_db = snr;
      row.decoder = config.decoders[d].label();
      std::uint64_t sym = 0, bits = 0, erased = 0, visited = 0, pd = 0;
      double time = 0.0;
      for (std::size_t t = 0; t < trials; ++t) {
        const Outcome& o = outcomes[t * nd + d];
        sym += o.symbol_errors;
        bits += o.bit_errors;
        erased += o.erased ? 1 : 0;
        visited += o.visited;
        pd += o.pd_calcs;
        row.max_visited = std::max(row.max_visited, o.visited);
        row.max_pd = std::max(row.max_pd, o.pd_calcs);
        time += o.time_s;
      }
      const double n = static_cast<double>(trials);
      row.trials = trials;
      row.ser = static_cast<double>(sym) / (n * config.n_tx);
      row.ber = static_cast<double>(bits) / (n * config.n_tx * c.bits_per_symbol);
      row.erasure_rate = static_cast<double>(erased) / n;
      row.mean_visited = static_cast<double>(visited) / n;
      row.mean_pd = static_cast<double>(pd) / n;
      row.mean_time_s = time / n;
      if (summary) {
        *summary << "snr " << std::setw(6) << format_real(snr) << "  " << std::left
                 << std::setw(36) << row.decoder << std::right << " ser " << format_real(row.ser)
                 << "  ber " << format_real(row.ber) << "  visited " << format_real(row.mean_visited)
                 << "  time " << format_real(row.mean_time_s) << " s\n";
      }
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

namespace {

constexpr const char* kColumns =
    "snr_db,decoder,ser,ber,erasure_rate,mean_visited,max_visited,mean_pd,max_pd,trials,"
    "mean_time_s";

}  // namespace

void write_csv(std::ostream& out, const MetricTable& table) {
  out << "#schema=" << kCsvSchema;
  for (const auto& [k, v] : table.tags)
    if (k != "schema") out << ',' << k << '=' << v;
  out << '\n' << kColumns << '\n';
  for (const auto& r : table.rows) {
    out << format_real(r.snr_db) << ',' << r.decoder << ',' << format_real(r.ser) << ','
        << format_real(r.ber) << ',' << format_real(r.erasure_rate) << ','
        << format_real(r.mean_visited) << ',' << r.max_visited << ',' << format_real(r.mean_pd)
        << ',' << r.max_pd << ',' << r.trials << ',' << format_real(r.mean_time_s) << '\n';
  }
}

MetricTable read_csv(std::istream& in) {
  MetricTable t;
  std::string line;
  int line_no = 0;
  bool schema = false, columns = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "csv line " + std::to_string(line_no) + ": ";
    if (line[0] == '#') {
      std::istringstream ls(line.substr(1));
      std::string kv;
      while (std::getline(ls, kv, ',')) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) continue;
        t.tags[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
      }
      if (t.tags.count("schema")) {
        if (t.tags["schema"] != kCsvSchema)
          throw ConfigError(where + "unsupported schema '" + t.tags["schema"] + "'");
        schema = true;
      }
      continue;
    }
    if (!columns) {
      if (line != kColumns) throw ConfigError(where + "unexpected column header");
      columns = true;
      continue;
    }
    std::vector<std::string> f;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw ConfigError(where + "expected 11 fields");
    try {
      MetricRow r;
      r.snr_db = f[0] == "inf" ? std::numeric_limits<double>::infinity() : std::stod(f[0]);
      r.decoder = f[1];
      r.ser = std::stod(f[2]);
      r.ber = std::stod(f[3]);
      r.erasure_rate = std::stod(f[4]);
      r.mean_visited = std::stod(f[5]);
      r.max_visited = std::stoull(f[6]);
      r.mean_pd = std::stod(f[7]);
      r.max_pd = std::stoull(f[8]);
      r.trials = std::stoull(f[9]);
      r.mean_time_s = std::stod(f[10]);
      t.rows.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw ConfigError(where + "bad number (" + e.what() + ")");
    }
  }
  if (!schema) throw ConfigError("csv: missing '#schema=' line");
  if (!columns) throw ConfigError("csv: missing column header");
  return t;
}

MetricTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_csv(in);
}

void write_csv_file(const std::string& path, const MetricTable& table) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_csv(out, table);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<CompareRow> compare_report(const MetricTable& a, const MetricTable& b) {
  for (const char* key : {"tx", "rx", "mod"}) {
    const auto ia = a.tags.find(key);
    const auto ib = b.tags.find(key);
    const std::string va = ia == a.tags.end() ? "?" : ia->second;
    const std::string vb = ib == b.tags.end() ? "?" : ib->second;
    if (va != vb)
      throw GridMismatchError(std::string("grid mismatch on ") + key + ": " + va + " vs " + vb);
  }
  auto by_snr = [](const MetricTable& t) {
    std::map<double, std::vector<const MetricRow*>> m;
    for (const auto& r : t.rows) m[r.snr_db].push_back(&r);
    return m;
  };
  const auto ga = by_snr(a);
  const auto gb = by_snr(b);
  if (ga.size() != gb.size() ||
      !std::equal(ga.begin(), ga.end(), gb.begin(),
                  [](const auto& x, const auto& y) { return x.first == y.first; }))
    throw GridMismatchError("grid mismatch: snr points differ");

  auto winner = [](double da) { return da < 0 ? 'A' : da > 0 ? 'B' : '='; };
  std::vector<CompareRow> out;
  for (const auto& [snr, rows_a] : ga) {
    const auto& rows_b = gb.at(snr);
    if (rows_a.size() != rows_b.size())
      throw GridMismatchError("grid mismatch: decoder count differs at snr " + format_real(snr));
    for (std::size_t i = 0; i < rows_a.size(); ++i) {
      const MetricRow& x = *rows_a[i];
      const MetricRow& y = *rows_b[i];
      CompareRow c;
      c.snr_db = snr;
      c.decoder_a = x.decoder;
      c.decoder_b = y.decoder;
      c.d_ser = x.ser - y.ser;
      c.d_ber = x.ber - y.ber;
      c.d_erasure = x.erasure_rate - y.erasure_rate;
      c.d_visited = x.mean_visited - y.mean_visited;
      c.d_pd = x.mean_pd - y.mean_pd;
      c.ser_winner = winner(c.d_ser);
      c.visited_winner = winner(c.d_visited);
      out.push_back(std::move(c));
    }
  }
  return out;
}

void write_compare(std::ostream& out, const std::vector<CompareRow>& rows) {
  out << "snr_db,decoder_a,decoder_b,d_ser,d_ber,d_erasure,d_visited,d_pd,ser_winner,"
         "visited_winner\n";
  for (const auto& r : rows)
    out << format_real(r.snr_db) << ',' << r.decoder_a << ',' << r.decoder_b << ','
        << format_real(r.d_ser) << ',' << format_real(r.d_ber) << ',' << format_real(r.d_erasure)
        << ',' << format_real(r.d_visited) << ',' << format_real(r.d_pd) << ',' << r.ser_winner
        << ',' << r.visited_winner << '\n';
}

}  // namespace mimosd
