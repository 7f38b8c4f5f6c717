#include "mimosd/node_store.hpp"

#include <algorithm>
#include <cstring>

namespace mimosd {

SearchNode NodeRef::materialize() const {
  SearchNode n;
  const auto s = suffix();
  const auto p = partial();
  n.suffix.assign(s.begin(), s.end());
  n.partial.assign(p.begin(), p.end());
  n.pd = pd();
  return n;
}

void NodeStore::grow() {
  cells_.resize(std::max({used_, 2 * cells_.size(), std::size_t{256}}));
}

void NodeStore::push(const NodeRef& node) {
  const auto p = node.partial();
  const auto s = node.suffix();
  NodeSlot slot = append(node.level(), node.pd());
  std::copy(p.begin(), p.end(), slot.partial.begin());
  std::copy(s.begin(), s.end(), slot.suffix.begin());
}

void NodeStore::push(const SearchNode& node) {
  NodeSlot slot = append(node.level(), node.pd);
  std::copy(node.partial.begin(), node.partial.end(), slot.partial.begin());
  std::copy(node.suffix.begin(), node.suffix.end(), slot.suffix.begin());
}

void NodeStore::pop_back() {
  used_ = starts_.back();
  starts_.pop_back();
  if (empty()) clear();
}

void NodeStore::pop_front() {
  ++head_;
  if (empty()) {
    clear();
  } else if (head_ >= 4096 && head_ * 2 >= starts_.size()) {
    compact();
  }
}

void NodeStore::clear() {
  used_ = 0;
  starts_.clear();
  head_ = 0;
}

void NodeStore::swap(NodeStore& other) noexcept {
  std::swap(n_tx_, other.n_tx_);
  cells_.swap(other.cells_);
  std::swap(used_, other.used_);
  starts_.swap(other.starts_);
  std::swap(head_, other.head_);
}

void NodeStore::compact() {
  const std::size_t offset = starts_[head_];
  std::copy(cells_.begin() + static_cast<std::ptrdiff_t>(offset),
            cells_.begin() + static_cast<std::ptrdiff_t>(used_), cells_.begin());
  used_ -= offset;
  starts_.erase(starts_.begin(), starts_.begin() + static_cast<std::ptrdiff_t>(head_));
  for (auto& s : starts_) s -= offset;
  head_ = 0;
}

}  // namespace mimosd
