#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "mimosd/linalg.hpp"
#include "mimosd/node_store.hpp"

namespace mimosd::detail {

/// Row-major copy of the triangular problem plus the incremental partial
/// distance arithmetic shared by every tree decoder.
///
/// A node at level L has antennas M-1 .. M-L fixed. Extending it by a group of
/// jp symbols fixes antennas a_u = M-1-L-u (u = 0 .. jp-1) and adds
///   g(a_u) = |y_bar[a_u] - partial[a_u] - sum_{v<u} R(a_u, a_v) s_v - R(a_u, a_u) s_u|^2
/// so the cost depends on the group only, never on the depth already fixed.
class TreeKernel {
 public:
  explicit TreeKernel(const PreprocessedProblem& p)
      : m_(p.n_tx), omega_(p.omega()), points_(p.constellation.points) {
    r_.resize(static_cast<std::size_t>(m_) * m_);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) r_[static_cast<std::size_t>(i) * m_ + j] = p.R(i, j);
    ybar_.assign(p.y_bar.data(), p.y_bar.data() + m_);
    fanout_.push_back(1);
    for (int j = 1; j <= m_ && fanout_.back() <= (std::size_t{1} << 40) / omega_; ++j)
      fanout_.push_back(fanout_.back() * omega_);
  }

  int n_tx() const { return m_; }
  std::size_t omega() const { return omega_; }
  const cd& r(int row, int col) const { return r_[static_cast<std::size_t>(row) * m_ + col]; }
  const cd& point(Symbol s) const { return points_[s]; }

  int group_at(int level, int group) const { return std::min(group, m_ - level); }
  std::size_t fanout(int jp) const { return fanout_.at(static_cast<std::size_t>(jp)); }

  // Symbols of the t-th child tuple, most significant (next antenna) first.
  void decode_tuple(std::size_t t, int jp, Symbol* out) const {
    if (jp == 1) {
      out[0] = static_cast<Symbol>(t);
      return;
    }
    for (int u = jp - 1; u >= 0; --u) {
      out[u] = static_cast<Symbol>(t % omega_);
      t /= omega_;
    }
  }

  double child_pd(double pd, std::span<const cd> partial, int level, const Symbol* group,
                  int jp) const {
    const int top = m_ - 1 - level;
    if (jp == 1) {
      const cd d = ybar_[top] - partial[top] - r(top, top) * points_[group[0]];
      return pd + std::norm(d);
    }
    for (int u = 0; u < jp; ++u) {
      const int a = top - u;
      cd acc = partial[a];
      for (int v = 0; v < u; ++v) acc += r(a, top - v) * points_[group[v]];
      pd += std::norm(ybar_[a] - acc - r(a, a) * points_[group[u]]);
    }
    return pd;
  }

  void write_child(std::span<const cd> partial, std::span<const Symbol> suffix, int level,
                   const Symbol* group, int jp, NodeSlot slot) const {
    const int top = m_ - 1 - level;
    const int rows = m_ - level - jp;
    for (int row = 0; row < rows; ++row) {
      cd acc = partial[row];
      for (int u = 0; u < jp; ++u) acc += r(row, top - u) * points_[group[u]];
      slot.partial[row] = acc;
    }
    std::copy(suffix.begin(), suffix.end(), slot.suffix.begin());
    std::copy(group, group + jp, slot.suffix.begin() + level);
  }

 private:
  int m_;
  std::size_t omega_;
  std::vector<cd> points_;
  std::vector<cd> r_;
  std::vector<cd> ybar_;
  std::vector<std::size_t> fanout_;
};

// Decoded antenna-order vector from a full suffix.
inline SymbolVector suffix_to_vector(std::span<const Symbol> suffix) {
  SymbolVector s(suffix.size());
  for (std::size_t k = 0; k < suffix.size(); ++k) s[suffix.size() - 1 - k] = suffix[k];
  return s;
}

// Owned copy of a popped node; reused across iterations.
struct NodeBuffer {
  double pd = 0.0;
  int level = 0;
  std::vector<cd> partial;
  SymbolVector suffix;

  void load(const NodeRef& n) {
    pd = n.pd();
    level = n.level();
    const auto p = n.partial();
    const auto s = n.suffix();
    partial.assign(p.begin(), p.end());
    suffix.assign(s.begin(), s.end());
  }
  void load_root(int n_tx) {
    pd = 0.0;
    level = 0;
    partial.assign(static_cast<std::size_t>(n_tx), cd{});
    suffix.clear();
  }
};

inline void push_root(NodeStore& store) {
  NodeSlot slot = store.append(0, 0.0);
  std::fill(slot.partial.begin(), slot.partial.end(), cd{});
}

}  // namespace mimosd::detail
