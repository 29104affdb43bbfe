#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dynkc/core.hpp"
#include "dynkc/ordered_id_set.hpp"

// Backend-independent view of a nested level family P_0 >= P_1 >= ... >= P_M
// with parent links between consecutive levels, plus the query operations
// built on top of it (cluster representatives, dendrogram export, validation).

namespace dynkc {

// One stored coordinate. `height` is the largest level the record belongs to;
// membership in P_i holds exactly for i <= height. `parent` is the slot of the
// level-(height+1) parent where a backend stores links explicitly.
struct PointRecord {
  Point point;
  PointId id = 0;
  std::vector<PointId> copy_ids;  // one id per live copy, first is canonical
  int height = 0;
  std::uint32_t parent = kNoSlot;
  std::uint32_t slot = kNoSlot;

  std::uint64_t multiplicity() const { return copy_ids.size(); }
  bool live() const { return !copy_ids.empty(); }
};

// Shared bookkeeping for all backends: the record store, level sizes, and the
// ordered difference sets P_{i-1} \ P_i keyed by insertion id.
class FamilyState {
 public:
  FamilyState(int d, Coord delta);

  int dim() const { return d_; }
  Coord delta() const { return delta_; }
  int level_top() const { return m_; }

  const PointRecord* find(const Point& p) const;
  PointRecord* find(const Point& p);
  const PointRecord& record(std::uint32_t slot) const { return records_[slot]; }
  PointRecord& record(std::uint32_t slot) { return records_[slot]; }

  // Creates a record at height 0 with a fresh canonical id.
  std::uint32_t create(const Point& p);
  PointId add_copy(std::uint32_t slot);
  // Drops one copy; returns true when the record itself is gone.
  bool remove_copy(std::uint32_t slot);
  void erase_record(std::uint32_t slot);

  // Moves the record between levels and keeps sizes and diff sets in step.
  void set_height(std::uint32_t slot, int new_height);

  // Drops all records back to height 0 and clears diff/size bookkeeping
  // (record identities, ids and multiplicities survive).
  void reset_heights();

  std::uint64_t level_size(int i) const { return level_size_[i]; }
  std::size_t distinct_count() const { return index_.size(); }
  std::uint64_t total_count() const { return total_copies_; }

  const OrderedIdSet& diff_order(int i) const { return diff_[i]; }

  // Live slots in ascending id order.
  std::vector<std::uint32_t> slots_by_id() const;
  void for_each_slot(const std::function<void(std::uint32_t)>& fn) const;

 private:
  int d_;
  Coord delta_;
  int m_;
  std::deque<PointRecord> records_;
  std::vector<std::uint32_t> free_;
  std::unordered_map<Point, std::uint32_t, PointHash> index_;
  std::vector<std::uint64_t> level_size_;  // size M+1
  std::vector<OrderedIdSet> diff_;         // diff_[i] = ids of P_{i-1} \ P_i, i >= 1
  PointId next_id_ = 1;
  std::uint64_t total_copies_ = 0;
};

class FamilyView {
 public:
  virtual ~FamilyView() = default;

  virtual int level_top() const = 0;  // M
  virtual std::uint64_t level_size(int i) const = 0;
  virtual std::size_t distinct_count() const = 0;
  virtual std::uint64_t total_count() const = 0;
  virtual const PointRecord* find(const Point& p) const = 0;
  // Members of P_i in ascending id order.
  virtual std::vector<const PointRecord*> level_members(int i) const = 0;
  // p(i, x) for x in P_{i-1}: a member of P_i close to x (x itself if x is in P_i).
  virtual const PointRecord& parent_in_level(int i, const PointRecord& x) const = 0;
  virtual std::optional<std::size_t> diff_rank(int i, PointId id) const = 0;
};

// FamilyView backed by a FamilyState; backends only add parent resolution.
class StateBackedFamily : public FamilyView {
 public:
  int level_top() const override { return st_.level_top(); }
  std::uint64_t level_size(int i) const override { return st_.level_size(i); }
  std::size_t distinct_count() const override { return st_.distinct_count(); }
  std::uint64_t total_count() const override { return st_.total_count(); }
  const PointRecord* find(const Point& p) const override { return st_.find(p); }
  std::vector<const PointRecord*> level_members(int i) const override;
  std::optional<std::size_t> diff_rank(int i, PointId id) const override {
    return st_.diff_order(i).rank(id);
  }

  int dim() const { return st_.dim(); }
  Coord delta() const { return st_.delta(); }

  // Testing support: force a record's level membership without touching any
  // backend geometry, to fabricate invalid families for the validator.
  void debug_force_height(const Point& p, int height);

 protected:
  StateBackedFamily(int d, Coord delta) : st_(d, delta) {}
  FamilyState st_;
};

// Mutating surface shared by the dynamic backends.
class DynamicBackend : public StateBackedFamily {
 public:
  using StateBackedFamily::StateBackedFamily;
  virtual PointId insert(const Point& p) = 0;
  virtual void erase(const Point& p) = 0;  // throws NotFoundError when absent
  const PointRecord& cluster(const Point& p, std::uint64_t k) const;
};

// --- queries over any view ---

// p^i(x): follow parent links up to level i. Throws NotFoundError when p is absent.
const PointRecord& ancestor(const FamilyView& view, const Point& p, int i);

// Representative of p's cluster in the k-clustering; promoted representatives
// are the first k - |P_i| members of P_{i-1} \ P_i in insertion order.
const PointRecord& representative(const FamilyView& view, const Point& p, std::uint64_t k);

struct Cluster {
  PointId rep_id = 0;
  Point rep_point;
  std::vector<std::pair<Point, std::uint64_t>> members;  // (coords, multiplicity)
};

struct Clustering {
  std::uint64_t k = 0;
  std::vector<Cluster> clusters;  // ascending rep id
  std::vector<Point> rep_points() const;
  std::vector<std::vector<Point>> member_partition() const;  // distinct coords only
};

Clustering clustering_at_k(const FamilyView& view, std::uint64_t k);

struct DendrogramLink {
  int level = 0;
  PointId child = 0;
  PointId parent = 0;
};

struct DendrogramExport {
  int level_top = 0;
  std::size_t n_distinct = 0;
  std::uint64_t n_total = 0;
  std::vector<std::uint64_t> level_sizes;  // empty when no points are stored
  std::vector<DendrogramLink> links;       // ordered by (level, child id)
  std::string to_text() const;
};

DendrogramExport export_dendrogram(const FamilyView& view);

struct Violation {
  enum class Kind {
    nesting,             // P_i not contained in P_{i-1}
    root_not_singleton,  // |P_M| != 1 on a nonempty family
    separation,          // two members of P_i at distance <= 2^i (i >= 1)
    parent_distance,     // parent link longer than alpha * 2^i
    ancestor_distance,   // p^i(x) farther than alpha * 2^(i+1)
    missing_parent,      // parent resolution failed for a non-member
    size_mismatch,       // cached level size != member count
    diff_mismatch,       // diff set does not match P_{i-1} \ P_i
  };
  Kind kind;
  int level = 0;
  PointId a = 0;
  PointId b = 0;
  double measured = 0.0;
  std::string describe() const;
};

// Exhaustive O(n^2 * M) family check; report-only.
std::vector<Violation> validate_family(const FamilyView& view, double alpha);

}  // namespace dynkc
