#pragma once

#include <cstddef>
#include <memory>
#include <utility>
#include <span>
#include <vector>

#include "mimosd/model.hpp"

namespace mimosd {

/// A search-tree node as a plain value.
///
/// suffix[k] is the symbol fixed at tree level k + 1, i.e. antenna M-1-k.
/// partial[row] = sum over fixed antennas i of R(row, i) * s_i, kept for the
/// rows 0 .. M-L-1 that are still unresolved.
struct SearchNode {
  SymbolVector suffix;
  double pd = 0.0;
  std::vector<cd> partial;

  int level() const { return static_cast<int>(suffix.size()); }
};

// Leaves trivially constructible elements uninitialized on resize().
template <class T>
struct DefaultInitAllocator : std::allocator<T> {
  template <class U>
  struct rebind {
    using other = DefaultInitAllocator<U>;
  };
  using std::allocator<T>::allocator;

  template <class U>
  void construct(U* p) noexcept {
    ::new (static_cast<void*>(p)) U;
  }
  template <class U, class... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
};

// Read-only view of a record inside a NodeStore.
class NodeRef {
 public:
  struct Cell {
    double a;
    double b;
  };

  NodeRef(const Cell* base, int n_tx) : base_(base), n_tx_(n_tx) {}

  double pd() const { return base_->a; }
  int level() const { return static_cast<int>(base_->b); }
  std::span<const cd> partial() const {
    return {reinterpret_cast<const cd*>(base_ + 1), static_cast<std::size_t>(n_tx_ - level())};
  }
  std::span<const Symbol> suffix() const {
    return {reinterpret_cast<const Symbol*>(base_ + 1 + (n_tx_ - level())),
            static_cast<std::size_t>(level())};
  }
  SearchNode materialize() const;

 private:
  const Cell* base_;
  int n_tx_;
};

// Writable record returned by NodeStore::append. Valid until the next append.
struct NodeSlot {
  std::span<cd> partial;
  std::span<Symbol> suffix;
};

/// Flat, allocation-amortized storage for search nodes of one problem size.
///
/// Records are variable length (a node at level L carries M-L partial cells and
/// L symbols) so a breadth-first frontier of a million leaves' parents fits in
/// tens of megabytes. Supports both stack (back) and queue (front) removal.
class NodeStore {
 public:
  using Cell = NodeRef::Cell;

  explicit NodeStore(int n_tx = 0) : n_tx_(n_tx) {}

  int n_tx() const { return n_tx_; }
  bool empty() const { return head_ == starts_.size(); }
  std::size_t size() const { return starts_.size() - head_; }

  NodeRef front() const { return at(0); }
  NodeRef back() const { return ref(starts_.back()); }
  NodeRef at(std::size_t i) const { return ref(starts_[head_ + i]); }

  NodeSlot append(int level, double pd) {
    const std::size_t start = used_;
    used_ += cells_for(n_tx_, level);
    if (used_ > cells_.size()) grow();
    starts_.push_back(start);
    Cell* base = cells_.data() + start;
    base->a = pd;
    base->b = static_cast<double>(level);
    const auto rows = static_cast<std::size_t>(n_tx_ - level);
    return NodeSlot{{reinterpret_cast<cd*>(base + 1), rows},
                    {reinterpret_cast<Symbol*>(base + 1 + rows), static_cast<std::size_t>(level)}};
  }
  void push(const NodeRef& node);
  void push(const SearchNode& node);

  void pop_back();
  void pop_front();
  void clear();
  // Clears and retargets the store to another problem size, keeping capacity.
  void reset(int n_tx) {
    clear();
    n_tx_ = n_tx;
  }
  void swap(NodeStore& other) noexcept;

  static std::size_t cells_for(int n_tx, int level) {
    return 1 + static_cast<std::size_t>(n_tx - level) + (static_cast<std::size_t>(level) + 15) / 16;
  }

 private:
  NodeRef ref(std::size_t start) const { return NodeRef(cells_.data() + start, n_tx_); }
  void compact();
  void grow();

  int n_tx_;
  std::vector<Cell, DefaultInitAllocator<Cell>> cells_;  // capacity; first used_ are live
  std::size_t used_ = 0;
  std::vector<std::size_t> starts_;
  std::size_t head_ = 0;
};

}  // namespace mimosd
