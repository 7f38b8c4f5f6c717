#include "mimosd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "mimosd/errors.hpp"

namespace mimosd {

double scratch_pd(std::span<const Symbol> suffix, const Eigen::MatrixXcd& R,
                  const Eigen::VectorXcd& y_bar, const Constellation& constellation) {
  const auto m = static_cast<int>(R.rows());
  const auto len = static_cast<int>(suffix.size());
  if (len > m) throw ShapeError("scratch_pd: suffix longer than M");
  double total = 0.0;
  for (int k = 1; k <= len; ++k) {
    const int row = m - k;
    cd acc = y_bar(row);
    for (int i = row; i <= m - 1; ++i) {
      // antenna i sits at suffix position m-1-i
      acc -= R(row, i) * constellation.points[suffix[static_cast<std::size_t>(m - 1 - i)]];
    }
    total += std::norm(acc);
  }
  return total;
}

std::vector<double> batch_evaluate_reference(const Eigen::MatrixXcd& R_sub,
                                             const Eigen::VectorXcd& y_star,
                                             const Eigen::MatrixXcd& V) {
  if (R_sub.rows() != R_sub.cols() || R_sub.rows() != y_star.size() ||
      V.rows() != y_star.size())
    throw ShapeError("batch_evaluate_reference: shape mismatch");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(V.cols()));
  for (Eigen::Index j = 0; j < V.cols(); ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < V.rows(); ++i) {
      cd b = y_star(i);
      for (Eigen::Index k = 0; k < V.rows(); ++k) b -= R_sub(i, k) * V(k, j);
      acc += std::norm(b);
    }
    out.push_back(acc);
  }
  return out;
}

namespace {

std::string describe(const TraceEvent& e) {
  std::ostringstream os;
  os << to_string(e.kind) << " worker " << e.worker << " seq " << e.seq << " [";
  for (std::size_t i = 0; i < e.suffix.size(); ++i) os << (i ? "." : "") << int(e.suffix[i]);
  os << "] pd " << e.pd << " r2 " << e.radius_sq;
  return os.str();
}

bool terminal(EventKind k) { return k != EventKind::RadiusUpdate; }

}  // namespace

AuditVerdict verify_trace(const AuditTrace& trace, const PreprocessedProblem& problem) {
  AuditVerdict v;
  auto fail = [&](std::string msg) { v.violations.push_back(std::move(msg)); };

  if (trace.n_tx != problem.n_tx || trace.omega != static_cast<int>(problem.omega())) {
    fail("trace header M/omega does not match the problem");
    return v;
  }
  if (trace.group < 1) {
    fail("trace header has J < 1");
    return v;
  }
  const int m = trace.n_tx;
  const int group = trace.group;

  // Per-worker order.
  std::map<int, std::vector<const TraceEvent*>> by_worker;
  for (const auto& e : trace.events) by_worker[e.worker].push_back(&e);
  for (auto& [w, evs] : by_worker) {
    std::stable_sort(evs.begin(), evs.end(),
                     [](const TraceEvent* a, const TraceEvent* b) { return a->seq < b->seq; });
    for (std::size_t i = 1; i < evs.size(); ++i)
      if (evs[i]->radius_sq > evs[i - 1]->radius_sq)
        fail("radius increased: " + describe(*evs[i - 1]) + " -> " + describe(*evs[i]));
  }

  // Cross-worker publication order.
  std::vector<const TraceEvent*> pubs;
  for (const auto& e : trace.events)
    if (e.kind == EventKind::RadiusUpdate) pubs.push_back(&e);
  std::stable_sort(pubs.begin(), pubs.end(),
                   [](const TraceEvent* a, const TraceEvent* b) { return a->pub < b->pub; });
  for (std::size_t i = 1; i < pubs.size(); ++i)
    if (pubs[i]->worker != pubs[i - 1]->worker && pubs[i]->radius_sq >= pubs[i - 1]->radius_sq)
      fail("publication order not decreasing: " + describe(*pubs[i - 1]) + " -> " +
           describe(*pubs[i]));

  // Per-event sphere rules and node bookkeeping.
  std::map<SymbolVector, int> fate_count;
  std::map<SymbolVector, std::size_t> child_count;
  std::map<SymbolVector, bool> expanded;
  for (const auto& e : trace.events) {
    if (static_cast<int>(e.suffix.size()) > m) {
      fail("suffix longer than M: " + describe(e));
      continue;
    }
    for (Symbol s : e.suffix)
      if (s >= trace.omega) fail("symbol out of range: " + describe(e));
    switch (e.kind) {
      case EventKind::Prune:
        if (!(e.pd >= e.radius_sq)) fail("pruned inside the sphere: " + describe(e));
        break;
      case EventKind::Expand:
        if (!(e.pd < e.radius_sq)) fail("expanded outside the sphere: " + describe(e));
        if (static_cast<int>(e.suffix.size()) == m) fail("expanded a leaf: " + describe(e));
        expanded[e.suffix] = true;
        break;
      case EventKind::Leaf:
        if (!(e.pd < e.radius_sq)) fail("leaf accepted outside the sphere: " + describe(e));
        if (static_cast<int>(e.suffix.size()) != m) fail("leaf event above level M: " + describe(e));
        break;
      case EventKind::RadiusUpdate:
      case EventKind::Cut:
      case EventKind::Pooled:
        break;
    }
    if (!terminal(e.kind)) continue;
    if (++fate_count[e.suffix] == 2) fail("node has more than one fate: " + describe(e));
    if (!e.suffix.empty()) {
      const auto lc = static_cast<int>(e.suffix.size());
      const int parent_level = group * ((lc - 1) / group);
      child_count[SymbolVector(e.suffix.begin(), e.suffix.begin() + parent_level)]++;
    }
  }

  if (!trace.events.empty() && fate_count.find(SymbolVector{}) == fate_count.end())
    fail("root never appears in the trace");

  for (const auto& [parent, n] : child_count) {
    if (!expanded.count(parent)) {
      std::ostringstream os;
      os << "children of a node that was never expanded (level " << parent.size() << ")";
      fail(os.str());
    }
  }
  for (const auto& [node, flag] : expanded) {
    const int level = static_cast<int>(node.size());
    const int jp = std::min(group, m - level);
    const double expected = std::pow(static_cast<double>(trace.omega), jp);
    const auto it = child_count.find(node);
    const std::size_t got = it == child_count.end() ? 0 : it->second;
    if (static_cast<double>(got) != expected) {
      std::ostringstream os;
      os << "expanded node at level " << level << " accounts for " << got << " of " << expected
         << " children";
      fail(os.str());
    }
  }
  return v;
}

}  // namespace mimosd
