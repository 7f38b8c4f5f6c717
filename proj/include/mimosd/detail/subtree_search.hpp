#pragma once

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <vector>

#include "mimosd/detail/tree_kernel.hpp"
#include "mimosd/report.hpp"
#include "mimosd/search.hpp"
#include "mimosd/trace.hpp"

namespace mimosd::detail {

/// One sphere-decoder instance: pop, prune or branch, keep the best leaf.
///
/// Radius is LocalRadius for the serial decoder and SharedRadius for the
/// parallel ones; the engine itself never touches another thread's state.
template <class Radius>
class SubtreeSearch {
 public:
  SubtreeSearch(const TreeKernel& kernel, Strategy strategy, int group, Radius& radius,
                TraceBuffer* trace)
      : kernel_(kernel),
        strategy_(strategy),
        group_(group),
        radius_(radius),
        trace_(trace),
        children_(kernel.n_tx()) {
    tuple_.resize(static_cast<std::size_t>(kernel.n_tx()));
    scratch_suffix_.resize(static_cast<std::size_t>(kernel.n_tx()));
  }

  // Removes the next node from `pool` per the strategy into the parent buffer.
  // Returns false (and records a prune) when it lies outside the current sphere.
  bool take(NodeStore& pool) {
    const NodeRef n = strategy_ == Strategy::BFS ? pool.front() : pool.back();
    const double r2 = radius_.load();
    if (n.pd() >= r2) {
      ++nodes_.pruned;
      if (trace_) trace_->record(EventKind::Prune, n.suffix(), n.pd(), r2);
      if (strategy_ == Strategy::BFS)
        pool.pop_front();
      else
        pool.pop_back();
      return false;
    }
    parent_.load(n);
    if (strategy_ == Strategy::BFS)
      pool.pop_front();
    else
      pool.pop_back();
    return admit_parent();
  }

  void take_root() {
    parent_.load_root(kernel_.n_tx());
  }

  bool admit_parent() {
    const double r2 = radius_.load();
    if (parent_.pd >= r2) {
      ++nodes_.pruned;
      if (trace_) trace_->record(EventKind::Prune, parent_.suffix, parent_.pd, r2);
      return false;
    }
    return true;
  }

  // Branches the parent buffer. Admitted inner children are appended to `out`
  // (children() by default) in generation (lexicographic) order; leaves update
  // the radius directly.
  void expand() {
    children_.clear();
    expand_into(children_);
  }

  void expand_into(NodeStore& out) {
    const int level = parent_.level;
    const int jp = kernel_.group_at(level, group_);
    const std::size_t fan = kernel_.fanout(jp);
    const bool leaves = level + jp == kernel_.n_tx();
    ++counters_.visited_nodes;
    counters_.pd_calcs += fan;
    ++nodes_.expanded;
    nodes_.generated += fan;
    if (trace_) trace_->record(EventKind::Expand, parent_.suffix, parent_.pd, radius_.load());

    for (std::size_t t = 0; t < fan; ++t) {
      kernel_.decode_tuple(t, jp, tuple_.data());
      const double pd = kernel_.child_pd(parent_.pd, parent_.partial, level, tuple_.data(), jp);
      assert(pd >= parent_.pd);
      const double r2 = radius_.load();
      if (pd >= r2) {
        ++nodes_.pruned;
        if (trace_) trace_->record(EventKind::Prune, child_suffix(jp), pd, r2);
        continue;
      }
      if (leaves) {
        ++nodes_.leaves;
        const auto suffix = child_suffix(jp);
        if (trace_) trace_->record(EventKind::Leaf, suffix, pd, r2);
        std::uint64_t pub = 0;
        if (radius_.offer(pd, &pub)) {
          if (trace_) trace_->record(EventKind::RadiusUpdate, suffix, pd, pd, pub);
        }
        if (pd < best_pd_) {
          best_pd_ = pd;
          best_suffix_.assign(suffix.begin(), suffix.end());
        }
        continue;
      }
      NodeSlot slot = out.append(level + jp, pd);
      kernel_.write_child(parent_.partial, parent_.suffix, level, tuple_.data(), jp, slot);
    }
  }

  // Moves children() into `pool` honoring the strategy's removal order.
  void insert_children(NodeStore& pool) {
    const std::size_t n = children_.size();
    if (strategy_ != Strategy::BestFS) {
      for (std::size_t i = 0; i < n; ++i) pool.push(children_.at(i));
      return;
    }
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
      return children_.at(a).pd() < children_.at(b).pd();
    });
    // best child ends on top of the stack
    for (std::size_t i = n; i-- > 0;) pool.push(children_.at(order_[i]));
  }

  void run(NodeStore& pool) {
    while (!pool.empty()) {
      if (!take(pool)) continue;
      if (strategy_ == Strategy::BestFS) {
        expand();
        insert_children(pool);
      } else {
        expand_into(pool);  // generation order is already the removal order
      }
    }
  }

  // Accounts nodes left behind at termination.
  void record_pooled(const NodeStore& pool) {
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const NodeRef n = pool.at(i);
      ++nodes_.pooled;
      if (trace_) trace_->record(EventKind::Pooled, n.suffix(), n.pd(), radius_.load());
    }
  }

  NodeStore& children() { return children_; }
  const NodeBuffer& parent() const { return parent_; }
  const ThreadCounters& counters() const { return counters_; }
  const NodeAccounting& nodes() const { return nodes_; }
  double best_pd() const { return best_pd_; }
  const SymbolVector& best_suffix() const { return best_suffix_; }
  TraceBuffer* trace() const { return trace_; }

 private:
  std::span<const Symbol> child_suffix(int jp) {
    std::copy(parent_.suffix.begin(), parent_.suffix.end(), scratch_suffix_.begin());
    std::copy(tuple_.begin(), tuple_.begin() + jp, scratch_suffix_.begin() + parent_.level);
    return {scratch_suffix_.data(), static_cast<std::size_t>(parent_.level + jp)};
  }

  const TreeKernel& kernel_;
  Strategy strategy_;
  int group_;
  Radius& radius_;
  TraceBuffer* trace_;
  NodeBuffer parent_;
  NodeStore children_;
  SymbolVector tuple_;
  SymbolVector scratch_suffix_;
  std::vector<std::size_t> order_;
  ThreadCounters counters_;
  NodeAccounting nodes_;
  double best_pd_ = std::numeric_limits<double>::infinity();
  SymbolVector best_suffix_;
};

}  // namespace mimosd::detail
