#include "mimosd/search.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <numeric>
#include <string>

#include "mimosd/detail/subtree_search.hpp"
#include "mimosd/detail/tree_kernel.hpp"
#include "mimosd/errors.hpp"
#include "mimosd/shared_radius.hpp"
#include "mimosd/trace.hpp"

namespace mimosd {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::BFS: return "bfs";
    case Strategy::DFS: return "dfs";
    case Strategy::BestFS: return "bestfs";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "bfs") return Strategy::BFS;
  if (lower == "dfs") return Strategy::DFS;
  if (lower == "bestfs" || lower == "best" || lower == "best-fs") return Strategy::BestFS;
  throw ConfigError("unknown strategy '" + std::string(text) + "'");
}

void WorkPool::insert_batch(const std::vector<SearchNode>& children) {
  if (strategy_ != Strategy::BestFS) {
    for (const auto& c : children) store_.push(c);
    return;
  }
  std::vector<std::size_t> order(children.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return children[a].pd < children[b].pd; });
  for (std::size_t i = order.size(); i-- > 0;) store_.push(children[order[i]]);
}

SearchNode WorkPool::take() {
  if (strategy_ == Strategy::BFS) {
    SearchNode n = store_.front().materialize();
    store_.pop_front();
    return n;
  }
  SearchNode n = store_.back().materialize();
  store_.pop_back();
  return n;
}

SearchNode root_node(const PreprocessedProblem& problem) {
  SearchNode n;
  n.partial.assign(static_cast<std::size_t>(problem.n_tx), cd{});
  return n;
}

Increment evaluate_incremental(const SearchNode& parent, std::span<const Symbol> new_symbols,
                               const PreprocessedProblem& problem) {
  const int m = problem.n_tx;
  const int level = parent.level();
  const int jp = static_cast<int>(new_symbols.size());
  if (jp < 1 || level + jp > m) throw ShapeError("evaluate_incremental: extension past the leaves");
  if (parent.partial.size() != static_cast<std::size_t>(m - level))
    throw ShapeError("evaluate_incremental: parent cache does not match its level");
  const auto& pts = problem.constellation.points;

  // Running row sums; row a is final once every antenna above it is fixed.
  std::vector<cd> acc(parent.partial.begin(), parent.partial.end());
  double pd = parent.pd;
  for (int u = 0; u < jp; ++u) {
    const int a = m - 1 - level - u;
    const cd s = pts[new_symbols[static_cast<std::size_t>(u)]];
    pd += std::norm(problem.y_bar(a) - acc[static_cast<std::size_t>(a)] - problem.R(a, a) * s);
    for (int row = 0; row < a; ++row) acc[static_cast<std::size_t>(row)] += problem.R(row, a) * s;
  }
  acc.resize(static_cast<std::size_t>(m - level - jp));
  return Increment{pd, std::move(acc)};
}

std::vector<SearchNode> branch(const SearchNode& node, const PreprocessedProblem& problem,
                               int group) {
  if (group < 1) throw ConfigError("group size J must be >= 1");
  if (node.level() > problem.n_tx ||
      node.partial.size() != static_cast<std::size_t>(problem.n_tx - node.level()))
    throw ShapeError("branch: node cache does not match its level");
  const detail::TreeKernel kernel(problem);
  const int jp = kernel.group_at(node.level(), group);
  const std::size_t fan = kernel.fanout(jp);
  std::vector<SearchNode> out;
  out.reserve(fan);
  // Same arithmetic path the decoders use.
  SymbolVector tuple(static_cast<std::size_t>(jp));
  NodeStore scratch(problem.n_tx);
  for (std::size_t t = 0; t < fan; ++t) {
    kernel.decode_tuple(t, jp, tuple.data());
    const double pd = kernel.child_pd(node.pd, node.partial, node.level(), tuple.data(), jp);
    scratch.clear();
    NodeSlot slot = scratch.append(node.level() + jp, pd);
    kernel.write_child(node.partial, node.suffix, node.level(), tuple.data(), jp, slot);
    out.push_back(scratch.back().materialize());
  }
  return out;
}

DetectionReport sd_decode(const PreprocessedProblem& problem, const SdOptions& options) {
  if (options.group < 1) throw ConfigError("group size J must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const detail::TreeKernel kernel(problem);
  LocalRadius radius(problem.radius_sq);
  TraceBuffer* trace = options.trace ? &options.trace->buffer(0) : nullptr;
  detail::SubtreeSearch<LocalRadius> search(kernel, options.strategy, options.group, radius,
                                            trace);

  // Reused across calls: a breadth-first frontier can reach tens of megabytes
  // and re-faulting it in for every instance dominates small decodes.
  thread_local NodeStore pool;
  pool.reset(problem.n_tx);
  detail::push_root(pool);
  search.run(pool);

  DetectionReport rep;
  rep.visited_nodes = search.counters().visited_nodes;
  rep.pd_calcs = search.counters().pd_calcs;
  rep.nodes = search.nodes();
  rep.initial_radius_sq = problem.radius_sq;
  rep.final_radius_sq = radius.load();
  if (!search.best_suffix().empty()) {
    rep.decoded = detail::suffix_to_vector(search.best_suffix());
    rep.dist = search.best_pd();
  }
  rep.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

DetectionReport sd_decode(const PreprocessedProblem& problem, Strategy strategy, int group) {
  return sd_decode(problem, SdOptions{strategy, group, nullptr});
}

}  // namespace mimosd
