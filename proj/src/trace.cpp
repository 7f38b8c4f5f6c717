#include "mimosd/trace.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "mimosd/errors.hpp"

namespace mimosd {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Expand: return "expand";
    case EventKind::Prune: return "prune";
    case EventKind::Leaf: return "leaf";
    case EventKind::RadiusUpdate: return "radius_update";
    case EventKind::Cut: return "cut";
    case EventKind::Pooled: return "pooled";
  }
  return "?";
}

void TraceBuffer::record(EventKind kind, std::span<const Symbol> suffix, double pd,
                         double radius_sq, std::uint64_t pub) {
  TraceEvent e;
  e.kind = kind;
  e.worker = worker_;
  e.seq = next_seq_++;
  e.pub = pub;
  e.suffix.assign(suffix.begin(), suffix.end());
  e.pd = pd;
  e.radius_sq = radius_sq;
  events_.push_back(std::move(e));
}

TraceBuffer& TraceRecorder::buffer(int worker) {
  std::lock_guard lock(mutex_);
  return buffers_.try_emplace(worker, worker).first->second;
}

AuditTrace TraceRecorder::merged() const {
  std::lock_guard lock(mutex_);
  AuditTrace t;
  t.n_tx = n_tx_;
  t.omega = omega_;
  t.group = group_;
  for (const auto& [id, buf] : buffers_)
    t.events.insert(t.events.end(), buf.events().begin(), buf.events().end());
  return t;
}

namespace {

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::invalid_argument(s);
  return v;
}

EventKind parse_kind(const std::string& s) {
  for (auto k : {EventKind::Expand, EventKind::Prune, EventKind::Leaf, EventKind::RadiusUpdate,
                 EventKind::Cut, EventKind::Pooled})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("event kind " + s);
}

int header_field(const std::string& line, const std::string& key) {
  const auto pos = line.find(" " + key + "=");
  if (pos == std::string::npos) throw std::invalid_argument("missing " + key);
  return std::stoi(line.substr(pos + key.size() + 2));
}

}  // namespace

void write_trace(std::ostream& out, const AuditTrace& trace) {
  out << "# mimosd-trace v1 M=" << trace.n_tx << " omega=" << trace.omega << " J=" << trace.group
      << '\n';
  for (const auto& e : trace.events) {
    out << to_string(e.kind) << ' ' << e.worker << ' ' << e.seq << ' ' << e.pub << ' '
        << e.suffix.size() << ' ' << format_real(e.pd) << ' ' << format_real(e.radius_sq) << ' ';
    if (e.suffix.empty()) {
      out << '-';
    } else {
      for (std::size_t i = 0; i < e.suffix.size(); ++i) {
        if (i) out << '.';
        out << static_cast<int>(e.suffix[i]);
      }
    }
    out << '\n';
  }
}

std::string dump_trace(const AuditTrace& trace) {
  std::ostringstream os;
  write_trace(os, trace);
  return os.str();
}

AuditTrace parse_trace(std::istream& in) {
  AuditTrace t;
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      if (line[0] == '#') {
        if (line.find("mimosd-trace") != std::string::npos) {
          t.n_tx = header_field(line, "M");
          t.omega = header_field(line, "omega");
          t.group = header_field(line, "J");
          header = true;
        }
        continue;
      }
      if (!header) throw std::invalid_argument("event before the '# mimosd-trace' header");
      std::istringstream ls(line);
      std::string kind, pd, radius, suffix;
      TraceEvent e;
      std::size_t level = 0;
      if (!(ls >> kind >> e.worker >> e.seq >> e.pub >> level >> pd >> radius >> suffix))
        throw std::invalid_argument("expected 8 fields");
      e.kind = parse_kind(kind);
      e.pd = parse_real(pd);
      e.radius_sq = parse_real(radius);
      if (suffix != "-") {
        std::istringstream ss(suffix);
        std::string tok;
        while (std::getline(ss, tok, '.')) e.suffix.push_back(static_cast<Symbol>(std::stoi(tok)));
      }
      if (e.suffix.size() != level) throw std::invalid_argument("level does not match suffix");
      t.events.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw ConfigError("trace line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  if (!header) throw ConfigError("trace: missing '# mimosd-trace' header");
  return t;
}

AuditTrace parse_trace(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_trace(in);
}

}  // namespace mimosd
