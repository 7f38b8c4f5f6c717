#include "mimosd/parallel.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
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

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Per-expander state for the parallel-leaf search.
struct Expander {
  ThreadCounters counters;
  NodeAccounting nodes;
  TraceBuffer* trace = nullptr;
  SymbolVector tuple;
  SymbolVector suffix;
};

// Branches `parent` against a fixed radius snapshot. Admitted children (inner
// or leaf) go to `out` in generation order.
void expand_against(const detail::TreeKernel& kernel, const NodeRef& parent, int group,
                    double snapshot, NodeStore& out, Expander& ex) {
  const int level = parent.level();
  const int jp = kernel.group_at(level, group);
  const std::size_t fan = kernel.fanout(jp);
  const auto partial = parent.partial();
  const auto suffix = parent.suffix();
  ++ex.counters.visited_nodes;
  ex.counters.pd_calcs += fan;
  ++ex.nodes.expanded;
  ex.nodes.generated += fan;
  if (ex.trace) ex.trace->record(EventKind::Expand, suffix, parent.pd(), snapshot);
  out.clear();
  for (std::size_t t = 0; t < fan; ++t) {
    kernel.decode_tuple(t, jp, ex.tuple.data());
    const double pd = kernel.child_pd(parent.pd(), partial, level, ex.tuple.data(), jp);
    if (pd >= snapshot) {
      ++ex.nodes.pruned;
      if (ex.trace) {
        std::copy(suffix.begin(), suffix.end(), ex.suffix.begin());
        std::copy(ex.tuple.begin(), ex.tuple.begin() + jp, ex.suffix.begin() + level);
        ex.trace->record(EventKind::Prune,
                         {ex.suffix.data(), static_cast<std::size_t>(level + jp)}, pd, snapshot);
      }
      continue;
    }
    NodeSlot slot = out.append(level + jp, pd);
    kernel.write_child(partial, suffix, level, ex.tuple.data(), jp, slot);
  }
}

}  // namespace

DetectionReport pl_sd_decode(const PreprocessedProblem& problem, int n_threads, int batch_size,
                             TraceRecorder* trace) {
  if (n_threads < 1) throw ConfigError("pl-sd: thread count must be >= 1");
  if (batch_size < 1) throw ConfigError("pl-sd: batch size must be >= 1");
  const auto t0 = Clock::now();
  const int m = problem.n_tx;
  const int group = 1;
  const detail::TreeKernel kernel(problem);
  LocalRadius radius(problem.radius_sq);

  TraceBuffer* merge_trace = trace ? &trace->buffer(0) : nullptr;
  std::vector<Expander> ex(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    ex[t].trace = trace ? &trace->buffer(t + 1) : nullptr;
    ex[t].tuple.resize(static_cast<std::size_t>(m));
    ex[t].suffix.resize(static_cast<std::size_t>(m));
  }

  const std::size_t cap = static_cast<std::size_t>(n_threads) * static_cast<std::size_t>(batch_size);
  NodeStore pool(m);
  NodeStore batch(m);
  std::vector<NodeStore> out(cap, NodeStore(m));
  std::vector<std::vector<std::size_t>> kept(cap);
  NodeAccounting merge_nodes;
  double best_pd = std::numeric_limits<double>::infinity();
  SymbolVector best_suffix;
  detail::push_root(pool);

  while (!pool.empty()) {
    batch.clear();
    while (batch.size() < cap && !pool.empty()) {
      const NodeRef n = pool.back();
      const double r2 = radius.load();
      if (n.pd() >= r2) {
        ++merge_nodes.pruned;
        if (merge_trace) merge_trace->record(EventKind::Prune, n.suffix(), n.pd(), r2);
      } else {
        batch.push(n);
      }
      pool.pop_back();
    }
    const auto nb = static_cast<int>(batch.size());
    if (nb == 0) break;

    const double snapshot = radius.load();
#pragma omp parallel for num_threads(n_threads) schedule(dynamic, 1)
    for (int i = 0; i < nb; ++i) {
      const int t = std::min(omp_get_thread_num(), n_threads - 1);
      expand_against(kernel, batch.at(static_cast<std::size_t>(i)), group, snapshot,
                     out[static_cast<std::size_t>(i)], ex[static_cast<std::size_t>(t)]);
    }

    // Serial merge in batch order.
    for (int i = 0; i < nb; ++i) {
      NodeStore& o = out[static_cast<std::size_t>(i)];
      auto& k = kept[static_cast<std::size_t>(i)];
      k.clear();
      for (std::size_t c = 0; c < o.size(); ++c) {
        const NodeRef child = o.at(c);
        const double r2 = radius.load();
        if (child.pd() >= r2) {
          ++merge_nodes.pruned;
          if (merge_trace) merge_trace->record(EventKind::Prune, child.suffix(), child.pd(), r2);
          continue;
        }
        if (child.level() == m) {
          ++merge_nodes.leaves;
          if (merge_trace) merge_trace->record(EventKind::Leaf, child.suffix(), child.pd(), r2);
          std::uint64_t pub = 0;
          if (radius.offer(child.pd(), &pub) && merge_trace)
            merge_trace->record(EventKind::RadiusUpdate, child.suffix(), child.pd(), child.pd(),
                                pub);
          if (child.pd() < best_pd) {
            best_pd = child.pd();
            const auto s = child.suffix();
            best_suffix.assign(s.begin(), s.end());
          }
          continue;
        }
        k.push_back(c);
      }
      const auto& store = o;
      std::stable_sort(k.begin(), k.end(), [&](std::size_t a, std::size_t b) {
        return store.at(a).pd() < store.at(b).pd();
      });
    }
    // Node 0's best child ends on top, followed by the rest of node 0's
    // children, then node 1's, and so on.
    for (int i = nb - 1; i >= 0; --i) {
      const auto& k = kept[static_cast<std::size_t>(i)];
      for (std::size_t j = k.size(); j-- > 0;) pool.push(out[static_cast<std::size_t>(i)].at(k[j]));
    }
  }

  DetectionReport rep;
  rep.per_thread.reserve(static_cast<std::size_t>(n_threads));
  rep.nodes = merge_nodes;
  for (const auto& e : ex) {
    rep.per_thread.push_back(e.counters);
    rep.visited_nodes += e.counters.visited_nodes;
    rep.pd_calcs += e.counters.pd_calcs;
    rep.nodes += e.nodes;
  }
  rep.initial_radius_sq = problem.radius_sq;
  rep.final_radius_sq = radius.load();
  if (!best_suffix.empty()) {
    rep.decoded = detail::suffix_to_vector(best_suffix);
    rep.dist = best_pd;
  }
  rep.elapsed_s = seconds_since(t0);
  return rep;
}

std::string_view to_string(Balancing b) {
  return b == Balancing::Static ? "static" : "dynamic";
}

Balancing parse_balancing(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "static") return Balancing::Static;
  if (lower == "dynamic") return Balancing::Dynamic;
  throw ConfigError("unknown balancing '" + std::string(text) + "'");
}

namespace {

using Search = detail::SubtreeSearch<SharedRadius>;

// Wakes the master whenever some worker runs dry.
struct MasterSignal {
  std::mutex mutex;
  std::condition_variable cv;
  std::uint64_t events = 0;

  void notify() {
    {
      std::lock_guard lock(mutex);
      ++events;
    }
    cv.notify_one();
  }
};

struct PsdWorker {
  PsdWorker(const detail::TreeKernel& kernel, int group, SharedRadius& radius, TraceBuffer* trace)
      : pool(kernel.n_tx()), search(kernel, Strategy::BestFS, group, radius, trace) {}

  std::mutex mutex;
  std::condition_variable cv;
  NodeStore pool;
  bool in_flight = false;
  bool stop = false;
  Search search;
  std::thread thread;

  // Requires `mutex`.
  bool blocked() const { return pool.empty() && !in_flight; }

  void run(MasterSignal& master) {
    std::unique_lock lock(mutex);
    while (true) {
      cv.wait(lock, [&] { return stop || !pool.empty(); });
      if (stop) return;
      const bool admitted = search.take(pool);
      if (admitted) {
        in_flight = true;
        lock.unlock();
        search.expand();
        lock.lock();
        search.insert_children(pool);
        in_flight = false;
      }
      if (pool.empty()) {
        lock.unlock();
        master.notify();
        lock.lock();
      }
    }
  }
};

void hand_over(NodeStore& from, PsdWorker& to) {
  {
    std::lock_guard lock(to.mutex);
    to.pool.push(from.back());
  }
  from.pop_back();
  to.cv.notify_one();
}

}  // namespace

DetectionReport psd_decode(const PreprocessedProblem& problem, const PsdConfig& config,
                           TraceRecorder* trace) {
  if (config.n_workers < 1) throw ConfigError("psd: worker count must be >= 1");
  if (config.group < 1) throw ConfigError("group size J must be >= 1");
  const auto t0 = Clock::now();
  const int m = problem.n_tx;
  const auto n_workers = static_cast<std::size_t>(config.n_workers);
  const detail::TreeKernel kernel(problem);
  SharedRadius radius(problem.radius_sq);

  Search master(kernel, Strategy::BestFS, config.group, radius,
                trace ? &trace->buffer(0) : nullptr);
  NodeStore pool(m);
  detail::push_root(pool);
  while (!pool.empty() && pool.size() < n_workers) {
    if (!master.take(pool)) continue;
    master.expand();
    master.insert_children(pool);
  }

  std::vector<std::unique_ptr<PsdWorker>> workers;
  if (!pool.empty()) {
    MasterSignal signal;
    workers.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w)
      workers.push_back(std::make_unique<PsdWorker>(
          kernel, config.group, radius,
          trace ? &trace->buffer(static_cast<int>(w) + 1) : nullptr));
    for (auto& w : workers) hand_over(pool, *w);
    for (auto& w : workers) {
      PsdWorker* p = w.get();
      p->thread = std::thread([p, &signal] { p->run(signal); });
    }

    std::vector<PsdWorker*> idle;
    while (true) {
      std::uint64_t seen;
      {
        std::lock_guard lock(signal.mutex);
        seen = signal.events;
      }
      idle.clear();
      PsdWorker* busiest = nullptr;
      std::size_t busiest_size = 0;
      for (auto& w : workers) {
        std::lock_guard lock(w->mutex);
        if (w->blocked()) idle.push_back(w.get());
        if (w->pool.size() > busiest_size) {
          busiest_size = w->pool.size();
          busiest = w.get();
        }
      }
      if (pool.empty() && idle.size() == workers.size()) break;

      if (!idle.empty() && pool.empty() && config.balancing == Balancing::Dynamic &&
          busiest != nullptr) {
        std::lock_guard lock(busiest->mutex);
        pool.swap(busiest->pool);
      }
      for (PsdWorker* w : idle) {
        if (pool.empty()) break;
        hand_over(pool, *w);
      }

      std::unique_lock lock(signal.mutex);
      signal.cv.wait_for(lock, std::chrono::milliseconds(10),
                         [&] { return signal.events != seen; });
    }

    for (auto& w : workers) {
      {
        std::lock_guard lock(w->mutex);
        w->stop = true;
      }
      w->cv.notify_one();
    }
    for (auto& w : workers) w->thread.join();
  }

  DetectionReport rep;
  rep.per_thread.assign(n_workers + 1, ThreadCounters{});
  rep.per_thread[0] = master.counters();
  rep.nodes = master.nodes();
  double best_pd = master.best_pd();
  const SymbolVector* best_suffix = &master.best_suffix();
  for (std::size_t w = 0; w < workers.size(); ++w) {
    const Search& s = workers[w]->search;
    rep.per_thread[w + 1] = s.counters();
    rep.nodes += s.nodes();
    if (s.best_pd() < best_pd) {
      best_pd = s.best_pd();
      best_suffix = &s.best_suffix();
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
  rep.elapsed_s = seconds_since(t0);
  return rep;
}

}  // namespace mimosd
