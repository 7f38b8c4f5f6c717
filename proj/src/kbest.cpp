#include "mimosd/kbest.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "mimosd/detail/subtree_search.hpp"
#include "mimosd/detail/tree_kernel.hpp"
#include "mimosd/errors.hpp"
#include "mimosd/shared_radius.hpp"
#include "mimosd/trace.hpp"

namespace mimosd {

namespace {

using Clock = std::chrono::steady_clock;

/// Level-synchronous K-best descent below one start node (single-symbol
/// branching). Nodes at or beyond the radius are pruned at every level.
template <class Radius>
class KbestDescent {
 public:
  KbestDescent(const detail::TreeKernel& kernel, int k, double eps, Radius& radius,
               TraceBuffer* trace)
      : kernel_(kernel),
        k_(static_cast<std::size_t>(k)),
        eps_(eps),
        radius_(radius),
        trace_(trace),
        frontier_(kernel.n_tx()),
        next_(kernel.n_tx()) {
    suffix_.resize(static_cast<std::size_t>(kernel.n_tx()));
  }

  void run(const NodeRef& start) {
    const int m = kernel_.n_tx();
    const auto omega = kernel_.omega();
    frontier_.clear();
    frontier_.push(start);
    while (!frontier_.empty()) {
      const int level = frontier_.at(0).level();
      cands_.clear();
      for (std::size_t i = 0; i < frontier_.size(); ++i) {
        const NodeRef n = frontier_.at(i);
        const double r2 = radius_.load();
        if (n.pd() >= r2) {
          ++nodes_.pruned;
          if (trace_) trace_->record(EventKind::Prune, n.suffix(), n.pd(), r2);
          continue;
        }
        ++counters_.visited_nodes;
        counters_.pd_calcs += omega;
        ++nodes_.expanded;
        nodes_.generated += omega;
        if (trace_) trace_->record(EventKind::Expand, n.suffix(), n.pd(), r2);
        for (std::size_t w = 0; w < omega; ++w) {
          const auto s = static_cast<Symbol>(w);
          cands_.push_back({kernel_.child_pd(n.pd(), n.partial(), level, &s, 1), i, s});
        }
      }
      if (level + 1 == m) {
        for (const auto& c : cands_) settle_leaf(c);
        return;
      }

      survivors_.clear();
      for (std::size_t c = 0; c < cands_.size(); ++c) {
        const double r2 = radius_.load();
        if (cands_[c].pd >= r2) {
          ++nodes_.pruned;
          if (trace_) trace_->record(EventKind::Prune, child_suffix(cands_[c]), cands_[c].pd, r2);
          continue;
        }
        survivors_.push_back(c);
      }
      std::stable_sort(survivors_.begin(), survivors_.end(),
                       [&](std::size_t a, std::size_t b) { return cands_[a].pd < cands_[b].pd; });
      std::size_t keep = std::min(k_, survivors_.size());
      if (keep > 0 && eps_ > 0.0) {
        // At most K near-ties: deep levels share most of their pd, so an
        // uncapped margin admits nearly every sibling.
        const double limit = (1.0 + eps_) * cands_[survivors_[keep - 1]].pd;
        const std::size_t cap = std::min(2 * k_, survivors_.size());
        while (keep < cap && cands_[survivors_[keep]].pd <= limit) ++keep;
      }
      for (std::size_t j = keep; j < survivors_.size(); ++j) {
        ++nodes_.cut;
        if (trace_) {
          const auto& c = cands_[survivors_[j]];
          trace_->record(EventKind::Cut, child_suffix(c), c.pd, radius_.load());
        }
      }
      next_.clear();
      for (std::size_t j = 0; j < keep; ++j) {
        const auto& c = cands_[survivors_[j]];
        const NodeRef parent = frontier_.at(c.parent);
        NodeSlot slot = next_.append(level + 1, c.pd);
        kernel_.write_child(parent.partial(), parent.suffix(), level, &c.symbol, 1, slot);
      }
      frontier_.swap(next_);
    }
  }

  const ThreadCounters& counters() const { return counters_; }
  const NodeAccounting& nodes() const { return nodes_; }
  double best_pd() const { return best_pd_; }
  const SymbolVector& best_suffix() const { return best_suffix_; }

 private:
  struct Candidate {
    double pd;
    std::size_t parent;
    Symbol symbol;
  };

  std::span<const Symbol> child_suffix(const Candidate& c) {
    const auto ps = frontier_.at(c.parent).suffix();
    std::copy(ps.begin(), ps.end(), suffix_.begin());
    suffix_[ps.size()] = c.symbol;
    return {suffix_.data(), ps.size() + 1};
  }

  void settle_leaf(const Candidate& c) {
    const double r2 = radius_.load();
    const auto suffix = child_suffix(c);
    if (c.pd >= r2) {
      ++nodes_.pruned;
      if (trace_) trace_->record(EventKind::Prune, suffix, c.pd, r2);
      return;
    }
    ++nodes_.leaves;
    if (trace_) trace_->record(EventKind::Leaf, suffix, c.pd, r2);
    std::uint64_t pub = 0;
    if (radius_.offer(c.pd, &pub) && trace_)
      trace_->record(EventKind::RadiusUpdate, suffix, c.pd, c.pd, pub);
    if (c.pd < best_pd_) {
      best_pd_ = c.pd;
      best_suffix_.assign(suffix.begin(), suffix.end());
    }
  }

  const detail::TreeKernel& kernel_;
  std::size_t k_;
  double eps_;
  Radius& radius_;
  TraceBuffer* trace_;
  NodeStore frontier_;
  NodeStore next_;
  std::vector<Candidate> cands_;
  std::vector<std::size_t> survivors_;
  SymbolVector suffix_;
  ThreadCounters counters_;
  NodeAccounting nodes_;
  double best_pd_ = std::numeric_limits<double>::infinity();
  SymbolVector best_suffix_;
};

}  // namespace

DetectionReport kbest_decode(const PreprocessedProblem& problem, int k, TraceRecorder* trace) {
  if (k < 1) throw ConfigError("k-best: K must be >= 1");
  const auto t0 = Clock::now();
  const detail::TreeKernel kernel(problem);
  LocalRadius radius(std::numeric_limits<double>::infinity());
  KbestDescent<LocalRadius> descent(kernel, k, 0.0, radius, trace ? &trace->buffer(0) : nullptr);
  NodeStore root(problem.n_tx);
  detail::push_root(root);
  descent.run(root.back());

  DetectionReport rep;
  rep.visited_nodes = descent.counters().visited_nodes;
  rep.pd_calcs = descent.counters().pd_calcs;
  rep.nodes = descent.nodes();
  rep.initial_radius_sq = std::numeric_limits<double>::infinity();
  rep.final_radius_sq = radius.load();
  rep.decoded = detail::suffix_to_vector(descent.best_suffix());
  rep.dist = descent.best_pd();
  rep.elapsed_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

DetectionReport sd_kbest_decode(const PreprocessedProblem& problem, const KbestConfig& config,
                                TraceRecorder* trace) {
  if (config.k < 1) throw ConfigError("sd-kbest: K must be >= 1");
  if (config.n_workers < 1) throw ConfigError("sd-kbest: worker count must be >= 1");
  if (!(config.closeness_eps >= 0.0)) throw ConfigError("sd-kbest: eps must be >= 0");
  const auto t0 = Clock::now();
  const detail::TreeKernel kernel(problem);
  SharedRadius radius(problem.radius_sq);
  const auto n_workers = static_cast<std::size_t>(config.n_workers);

  detail::SubtreeSearch<SharedRadius> master(kernel, Strategy::BestFS, 1, radius,
                                             trace ? &trace->buffer(0) : nullptr);
  NodeStore pool(problem.n_tx);
  detail::push_root(pool);
  while (!pool.empty() && pool.size() < 4 * n_workers) {
    if (!master.take(pool)) continue;
    master.expand();
    master.insert_children(pool);
  }

  using Descent = KbestDescent<SharedRadius>;
  std::vector<std::unique_ptr<Descent>> descents;
  if (!pool.empty()) {
    std::mutex pool_mutex;
    descents.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w)
      descents.push_back(std::make_unique<Descent>(
          kernel, config.k, config.closeness_eps, radius,
          trace ? &trace->buffer(static_cast<int>(w) + 1) : nullptr));
    std::vector<std::thread> threads;
    threads.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      threads.emplace_back([&, w] {
        NodeStore start(problem.n_tx);
        while (true) {
          {
            std::lock_guard lock(pool_mutex);
            if (pool.empty()) return;
            start.clear();
            start.push(pool.back());
            pool.pop_back();
          }
          descents[w]->run(start.back());
        }
      });
    }
    for (auto& t : threads) t.join();
  }

  DetectionReport rep;
  rep.per_thread.assign(n_workers + 1, ThreadCounters{});
  rep.per_thread[0] = master.counters();
  rep.nodes = master.nodes();
  double best_pd = master.best_pd();
  const SymbolVector* best_suffix = &master.best_suffix();
  for (std::size_t w = 0; w < descents.size(); ++w) {
    rep.per_thread[w + 1] = descents[w]->counters();
    rep.nodes += descents[w]->nodes();
    if (descents[w]->best_pd() < best_pd) {
      best_pd = descents[w]->best_pd();
      best_suffix = &descents[w]->best_suffix();
    }
  }
  for (const auto& t : rep.per_thread) {
    rep.visited_nodes += t.visited_nodes;
    rep.pd_calcs += t.pd_calcs;
  }
  rep.initial_radius_sq = problem.radius_sq;
  rep.final_radius_sq = radius.load();
  if (!best_suffix->empty()) {
    rep.decoded = detail::suffix_to_vector(*best_suffix);
    rep.dist = best_pd;
  }
  rep.elapsed_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return rep;
}

}  // namespace mimosd
