#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dynkc/core.hpp"

namespace dynkc {

// Ordered set of point ids with logarithmic rank queries.
// Treap keyed by id; priorities are a fixed hash of the id, so the shape is
// a pure function of the stored key set.
class OrderedIdSet {
 public:
  bool insert(PointId id) {
    if (contains(id)) return false;
    std::uint32_t n = alloc(id);
    root_ = merge3(root_, n, id);
    return true;
  }

  bool erase(PointId id) {
    bool erased = false;
    root_ = erase_rec(root_, id, erased);
    return erased;
  }

  bool contains(PointId id) const {
    std::uint32_t cur = root_;
    while (cur != kNoSlot) {
      if (nodes_[cur].id == id) return true;
      cur = id < nodes_[cur].id ? nodes_[cur].left : nodes_[cur].right;
    }
    return false;
  }

  // 1-based position of id in ascending order; nullopt if absent.
  std::optional<std::size_t> rank(PointId id) const {
    std::size_t before = 0;
    std::uint32_t cur = root_;
    while (cur != kNoSlot) {
      const Node& n = nodes_[cur];
      if (id == n.id) return before + count(n.left) + 1;
      if (id < n.id) {
        cur = n.left;
      } else {
        before += count(n.left) + 1;
        cur = n.right;
      }
    }
    return std::nullopt;
  }

  // 1-based select; r must be in [1, size()].
  PointId kth(std::size_t r) const {
    std::uint32_t cur = root_;
    while (cur != kNoSlot) {
      std::size_t left = count(nodes_[cur].left);
      if (r == left + 1) return nodes_[cur].id;
      if (r <= left) {
        cur = nodes_[cur].left;
      } else {
        r -= left + 1;
        cur = nodes_[cur].right;
      }
    }
    throw std::out_of_range("OrderedIdSet::kth");
  }

  std::size_t size() const { return count(root_); }
  bool empty() const { return root_ == kNoSlot; }

  void clear() {
    nodes_.clear();
    free_.clear();
    root_ = kNoSlot;
  }

  std::vector<PointId> to_sorted_vector() const {
    std::vector<PointId> out;
    out.reserve(size());
    collect(root_, out);
    return out;
  }

 private:
  struct Node {
    PointId id = 0;
    std::uint64_t pri = 0;
    std::uint32_t left = kNoSlot;
    std::uint32_t right = kNoSlot;
    std::uint32_t size = 1;
  };

  std::uint32_t count(std::uint32_t n) const { return n == kNoSlot ? 0 : nodes_[n].size; }

  void pull(std::uint32_t n) {
    nodes_[n].size = 1 + count(nodes_[n].left) + count(nodes_[n].right);
  }

  std::uint32_t alloc(PointId id) {
    std::uint32_t n;
    if (!free_.empty()) {
      n = free_.back();
      free_.pop_back();
      nodes_[n] = Node{};
    } else {
      n = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
    }
    nodes_[n].id = id;
    nodes_[n].pri = detail::mix64(id);
    return n;
  }

  // Split by key: left subtree gets ids < id, right gets ids > id (id absent).
  void split(std::uint32_t t, PointId id, std::uint32_t& l, std::uint32_t& r) {
    if (t == kNoSlot) {
      l = r = kNoSlot;
      return;
    }
    if (nodes_[t].id < id) {
      split(nodes_[t].right, id, nodes_[t].right, r);
      l = t;
    } else {
      split(nodes_[t].left, id, l, nodes_[t].left);
      r = t;
    }
    pull(t);
  }

  std::uint32_t merge(std::uint32_t l, std::uint32_t r) {
    if (l == kNoSlot) return r;
    if (r == kNoSlot) return l;
    if (nodes_[l].pri > nodes_[r].pri) {
      nodes_[l].right = merge(nodes_[l].right, r);
      pull(l);
      return l;
    }
    nodes_[r].left = merge(l, nodes_[r].left);
    pull(r);
    return r;
  }

  std::uint32_t merge3(std::uint32_t t, std::uint32_t single, PointId id) {
    std::uint32_t l, r;
    split(t, id, l, r);
    return merge(merge(l, single), r);
  }

  std::uint32_t erase_rec(std::uint32_t t, PointId id, bool& erased) {
    if (t == kNoSlot) return t;
    if (nodes_[t].id == id) {
      erased = true;
      std::uint32_t out = merge(nodes_[t].left, nodes_[t].right);
      free_.push_back(t);
      return out;
    }
    if (id < nodes_[t].id)
      nodes_[t].left = erase_rec(nodes_[t].left, id, erased);
    else
      nodes_[t].right = erase_rec(nodes_[t].right, id, erased);
    pull(t);
    return t;
  }

  void collect(std::uint32_t t, std::vector<PointId>& out) const {
    if (t == kNoSlot) return;
    collect(nodes_[t].left, out);
    out.push_back(nodes_[t].id);
    collect(nodes_[t].right, out);
  }

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> free_;
  std::uint32_t root_ = kNoSlot;
};

}  // namespace dynkc
