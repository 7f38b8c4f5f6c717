#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "mimosd/linalg.hpp"
#include "mimosd/node_store.hpp"
#include "mimosd/report.hpp"

namespace mimosd {

class TraceRecorder;

/// Work-pool discipline.
///   BFS    - FIFO, level order; the radius never shrinks before the last level.
///   DFS    - LIFO; the last generated child is explored first.
///   BestFS - LIFO with every expansion's children sorted so the smallest
///            partial distance is removed first (stable on ties).
enum class Strategy { BFS, DFS, BestFS };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);  // bfs | dfs | bestfs

/// Pool of search nodes with a fixed removal policy.
class WorkPool {
 public:
  WorkPool(Strategy strategy, int n_tx) : strategy_(strategy), store_(n_tx) {}

  Strategy strategy() const { return strategy_; }
  bool empty() const { return store_.empty(); }
  std::size_t size() const { return store_.size(); }

  // Inserts one branching batch (children in generation order).
  void insert_batch(const std::vector<SearchNode>& children);
  SearchNode take();

 private:
  Strategy strategy_;
  NodeStore store_;
};

SearchNode root_node(const PreprocessedProblem& problem);

struct Increment {
  double pd = 0.0;
  std::vector<cd> partial;  // rows still unresolved after the extension
};

// Extends `parent` by new_symbols (next antenna first) reusing its cached row
// sums: O(J * M) whatever the parent's depth.
Increment evaluate_incremental(const SearchNode& parent, std::span<const Symbol> new_symbols,
                               const PreprocessedProblem& problem);

// All |alphabet|^J' children of `node` (J' = min(J, M - level)) in lexicographic
// order of their new symbol tuples. No pruning.
std::vector<SearchNode> branch(const SearchNode& node, const PreprocessedProblem& problem,
                               int group);

struct SdOptions {
  Strategy strategy = Strategy::BestFS;
  int group = 1;  // J, symbols fixed per branching
  TraceRecorder* trace = nullptr;
};

/// Serial sphere decoder. Children with pd >= r^2 are pruned at generation and
/// again when popped; every leaf strictly inside the sphere becomes the new
/// incumbent and tightens r^2. Returns an erasure (empty decoded) when no leaf
/// lies inside the initial sphere.
DetectionReport sd_decode(const PreprocessedProblem& problem, const SdOptions& options);
DetectionReport sd_decode(const PreprocessedProblem& problem, Strategy strategy, int group = 1);

inline constexpr std::uint64_t kDefaultMlCap = std::uint64_t{1} << 24;

// Exhaustive argmin of ||y_bar - R s||^2 over all |alphabet|^M vectors. Ties
// keep the first vector in tree order (antenna M-1 most significant). Throws
// CapExceededError above `cap` candidates.
DetectionReport ml_bruteforce(const PreprocessedProblem& problem,
                              std::uint64_t cap = kDefaultMlCap);

}  // namespace mimosd
