#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mimosd/model.hpp"

namespace mimosd {

enum class EventKind { Expand, Prune, Leaf, RadiusUpdate, Cut, Pooled };

std::string_view to_string(EventKind kind);

struct TraceEvent {
  EventKind kind = EventKind::Expand;
  int worker = 0;
  std::uint64_t seq = 0;  // per-worker, monotone
  std::uint64_t pub = 0;  // radius publication order (RadiusUpdate only)
  SymbolVector suffix;
  double pd = 0.0;
  double radius_sq = 0.0;  // radius seen by the worker when the event happened
};

/// Recorded decode history. Trace dump format, one line per event:
///
///   # mimosd-trace v1 M=<n_tx> omega=<|alphabet|> J=<group>
///   <kind> <worker> <seq> <pub> <level> <pd> <radius_sq> <suffix>
///
/// kind is expand|prune|leaf|radius_update|cut|pooled, reals use %.17g ("inf"
/// for infinity), suffix is dot-separated symbol indices or "-" for the root.
struct AuditTrace {
  int n_tx = 0;
  int omega = 0;
  int group = 1;
  std::vector<TraceEvent> events;
};

// Append-only event list owned by a single worker.
class TraceBuffer {
 public:
  explicit TraceBuffer(int worker) : worker_(worker) {}

  void record(EventKind kind, std::span<const Symbol> suffix, double pd, double radius_sq,
              std::uint64_t pub = 0);
  const std::vector<TraceEvent>& events() const { return events_; }

 private:
  int worker_;
  std::uint64_t next_seq_ = 0;
  std::vector<TraceEvent> events_;
};

/// Per-worker buffers merged on demand. buffer() may be called concurrently;
/// each buffer must only be written by its worker.
class TraceRecorder {
 public:
  TraceRecorder(int n_tx, int omega, int group) : n_tx_(n_tx), omega_(omega), group_(group) {}

  TraceBuffer& buffer(int worker);
  AuditTrace merged() const;

 private:
  int n_tx_;
  int omega_;
  int group_;
  mutable std::mutex mutex_;
  std::map<int, TraceBuffer> buffers_;
};

void write_trace(std::ostream& out, const AuditTrace& trace);
std::string dump_trace(const AuditTrace& trace);
// Parses one trace; throws ConfigError with the offending line number.
AuditTrace parse_trace(std::istream& in);
AuditTrace parse_trace(std::string_view text);

}  // namespace mimosd
