#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <vector>

#include "mimosd/model.hpp"

namespace mimosd {

// Per-thread complexity counters. visited = nodes branched, pd_calcs = successor
// metrics evaluated.
struct ThreadCounters {
  std::uint64_t visited_nodes = 0;
  std::uint64_t pd_calcs = 0;

  ThreadCounters& operator+=(const ThreadCounters& o) {
    visited_nodes += o.visited_nodes;
    pd_calcs += o.pd_calcs;
    return *this;
  }
};

// Fate of every node that ever existed in a search. At termination
// 1 + generated == expanded + pruned + leaves + cut + pooled.
struct NodeAccounting {
  std::uint64_t generated = 0;
  std::uint64_t expanded = 0;
  std::uint64_t pruned = 0;
  std::uint64_t leaves = 0;
  std::uint64_t cut = 0;     // dropped by a K-best selection
  std::uint64_t pooled = 0;  // still queued at termination

  NodeAccounting& operator+=(const NodeAccounting& o) {
    generated += o.generated;
    expanded += o.expanded;
    pruned += o.pruned;
    leaves += o.leaves;
    cut += o.cut;
    pooled += o.pooled;
    return *this;
  }
  bool balanced() const { return 1 + generated == expanded + pruned + leaves + cut + pooled; }
};

struct DetectionReport {
  SymbolVector decoded;  // antenna order; empty when no leaf was found (erasure)
  double dist = std::numeric_limits<double>::infinity();
  std::uint64_t visited_nodes = 0;
  std::uint64_t pd_calcs = 0;
  double elapsed_s = 0.0;
  double initial_radius_sq = std::numeric_limits<double>::infinity();
  double final_radius_sq = std::numeric_limits<double>::infinity();
  std::vector<ThreadCounters> per_thread;  // empty for single-threaded decoders
  NodeAccounting nodes;

  bool erased() const { return decoded.empty(); }

  std::uint64_t max_thread_visited() const {
    std::uint64_t m = visited_nodes;
    if (!per_thread.empty()) {
      m = 0;
      for (const auto& t : per_thread) m = std::max(m, t.visited_nodes);
    }
    return m;
  }
  std::uint64_t max_thread_pd_calcs() const {
    std::uint64_t m = pd_calcs;
    if (!per_thread.empty()) {
      m = 0;
      for (const auto& t : per_thread) m = std::max(m, t.pd_calcs);
    }
    return m;
  }
};

}  // namespace mimosd
