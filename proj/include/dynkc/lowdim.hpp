#pragma once

#include <unordered_map>
#include <vector>

#include "dynkc/hierarchy.hpp"

namespace dynkc {

// Dynamic backend for small dimensions. Every level i keeps its members in a
// hash table keyed by the cell of a grid with cells of diameter 2^i/sqrt(d)
// (anchored at coordinate 1, no shift). An insertion ascends the levels until
// a member within 2^i is found in the surrounding cell box; deletions resume
// the interrupted ascents of the removed record's children.
class LowDimStructure final : public DynamicBackend {
 public:
  explicit LowDimStructure(const Config& cfg);

  PointId insert(const Point& p) override;
  void erase(const Point& p) override;
  const PointRecord& parent_in_level(int i, const PointRecord& x) const override;

  // All members of P_i within distance 2^i of p, ascending id. This is the
  // candidate set an insertion at level i sees; exposed for the probe
  // equivalence checks.
  std::vector<const PointRecord*> probe_level(const Point& p, int i) const;

  // Ids of the records whose stored parent link points at p.
  std::vector<PointId> children_of(const Point& p) const;

  const Config& config() const { return cfg_; }

 private:
  using CellKey = unsigned __int128;
  struct KeyHash {
    std::size_t operator()(CellKey k) const noexcept {
      return static_cast<std::size_t>(
          detail::mix64(static_cast<std::uint64_t>(k)) ^
          detail::mix64(static_cast<std::uint64_t>(k >> 64)));
    }
  };
  using CellMap = std::unordered_map<CellKey, std::vector<std::uint32_t>, KeyHash>;

  // cell index along one axis: floor((x-1) * sqrt(d) / 2^i), exactly
  std::uint64_t axis_cell(Coord x, int level) const;
  CellKey cell_key(const Point& p, int level) const;
  void grid_add(int level, std::uint32_t slot);
  void grid_remove(int level, std::uint32_t slot);
  std::vector<std::uint32_t> probe_slots(const Point& p, int level) const;
  // Continues an ascent from `from_level` upwards; links or promotes.
  void ascend(std::uint32_t slot, int from_level);
  void unlink_child(std::uint32_t parent, std::uint32_t child);

  Config cfg_;
  std::vector<CellMap> grids_;          // levels 0..M
  std::vector<int> key_bits_;           // per-level bits per axis
  std::vector<std::vector<std::uint32_t>> children_;  // per slot
};

}  // namespace dynkc
