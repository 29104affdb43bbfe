#pragma once

#include <random>
#include <unordered_map>
#include <vector>

#include "dynkc/hierarchy.hpp"

namespace dynkc {

// Exact cell arithmetic for one level of randomly shifted grids. The cell
// width is R = 2*sqrt(d)*2^i represented as D/2^P with D = ceil(sqrt(d)*2^P),
// and a shift is sigma/2^64 * R for a 64-bit sigma, so cell indices are
// computed entirely in 128-bit integer arithmetic:
//   cell(x) = floor((x + sigma*R/2^64) / R) = (x*2^(64+P) + sigma*D*2^(i+1)) / (D*2^(i+65))
class ShiftedGridGeometry {
 public:
  ShiftedGridGeometry(int d, int level, Coord max_coord);
  std::uint64_t axis_cell(Coord x, std::uint64_t sigma) const;
  int key_bits() const { return key_bits_; }
  int precision() const { return prec_; }

 private:
  int prec_ = 0;
  int mul_shift_ = 0;
  unsigned __int128 sft_ = 0;
  unsigned __int128 den_ = 0;
  int key_bits_ = 0;
};

struct SeparationResult {
  std::uint64_t trials = 0;
  std::uint64_t splits = 0;
  double rate() const { return trials ? double(splits) / double(trials) : 0.0; }
};

// Monte-Carlo estimate of the probability that a fresh randomly shifted grid
// of level `level` separates p and q (coordinates must be nonnegative).
SeparationResult separation_split_rate(int d, int level, const Point& p, const Point& q,
                                       std::uint64_t trials, std::uint64_t seed);

// Dynamic backend for arbitrary dimension. Level i derives P_i from P_{i-1}
// with g randomly shifted grids of width 2*sqrt(d)*2^i and a sampling chain
// P_{i,0} >= ... >= P_{i,ell}: each record carries one persisted random value,
// its rank is the deepest chain set it belongs to, a record is covered when a
// strictly higher-rank record shares one of its cells, and the uncovered
// records of each rank form maximal independent sets I_{i,j} (no two sharing a
// cell in any grid) whose union is P_i. Parent links are implicit; they are
// recovered by walking shared cells upwards in rank. Rebuilds fire when the
// distinct count drifts a factor 2 from the last snapshot.
class HighDimStructure final : public DynamicBackend {
 public:
  explicit HighDimStructure(const Config& cfg);

  PointId insert(const Point& p) override;
  void erase(const Point& p) override;
  const PointRecord& parent_in_level(int i, const PointRecord& x) const override;

  // For p in P_i (0 <= i < M): a member of P_{i+1} reachable through shared
  // cells; deterministic (lowest grid, then smallest id at every hop).
  const PointRecord& find_parent(const Point& p, int i) const;

  const Config& config() const { return cfg_; }
  std::uint64_t grid_count() const { return g_; }
  std::uint64_t size_snapshot() const { return n0_; }
  std::uint64_t rebuild_count() const { return rebuilds_; }

  // --- introspection for oracles and fixtures ---
  enum class LevelState : std::uint8_t { outside = 0, covered, uncovered, member };
  LevelState level_state(const PointRecord& rec, int level) const;
  int sampling_rank(const PointRecord& rec) const { return rank_[rec.slot]; }
  std::uint64_t sampling_value(const PointRecord& rec) const { return sigma_[rec.slot]; }
  // Per-axis shift numerators of one grid.
  const std::vector<std::uint64_t>& grid_shift(int level, int grid) const;
  unsigned __int128 cell_of(const Point& p, int level, int grid) const;

  struct CellSnapshot {
    int grid = 0;
    unsigned __int128 key = 0;
    std::vector<std::vector<PointId>> ids_by_rank;
    bool has_designated = false;
    PointId designated = 0;
  };
  // All nonempty cells of one level, ordered by (grid, key).
  std::vector<CellSnapshot> snapshot_level(int level) const;

 private:
  using CellKey = unsigned __int128;
  struct KeyHash {
    std::size_t operator()(CellKey k) const noexcept {
      return static_cast<std::size_t>(
          detail::mix64(static_cast<std::uint64_t>(k)) ^
          detail::mix64(static_cast<std::uint64_t>(k >> 64)));
    }
  };
  struct Cell {
    std::vector<std::vector<std::uint32_t>> by_rank;  // trailing ranks trimmed
    std::uint32_t designated = kNoSlot;
    int max_rank() const { return static_cast<int>(by_rank.size()) - 1; }
  };
  using CellMap = std::unordered_map<CellKey, Cell, KeyHash>;
  struct LevelGrid {
    CellMap cells;
    std::vector<std::uint64_t> shift;  // one sigma per axis
  };
  struct Delta {
    std::vector<std::uint32_t> removed;  // P_i membership losses
    std::vector<std::uint32_t> added;    // P_i membership gains
    bool empty() const { return removed.empty() && added.empty(); }
  };

  void init_levels();
  void ensure_slot_arrays(std::uint32_t slot);
  int compute_rank(std::uint64_t sigma) const;
  CellKey key_for(const Point& p, int level, int grid) const;
  std::size_t pos_index(int level, int grid) const {
    return static_cast<std::size_t>(level - 1) * g_ + grid;
  }
  Cell* find_cell(int level, int grid, CellKey key);
  const Cell* find_cell(int level, int grid, CellKey key) const;
  void bucket_remove(int level, int grid, CellKey key, std::uint32_t slot);
  void clear_designations(int level, std::uint32_t slot);
  // Admits every still-uncovered candidate with no designated cellmate,
  // ascending id.
  void process_admissions(int level, std::vector<std::uint32_t>& candidates, Delta& out);
  bool has_designated_cellmate(int level, std::uint32_t slot) const;
  void level_add(int level, std::uint32_t slot, Delta& out);
  // removal runs in two phases per batch: detach everything, then repair
  bool level_detach(int level, std::uint32_t slot);  // returns prior membership
  void level_repair_after_detach(int level, std::uint32_t slot, bool was_member, Delta& out);
  void cascade(int start_level, Delta changes);
  void maybe_rebuild();
  void rebuild(std::uint64_t n_now);

  Config cfg_;
  std::vector<ShiftedGridGeometry> geom_;     // index 1..M
  std::vector<std::vector<LevelGrid>> levels_;  // [level][grid]
  std::vector<std::uint64_t> sigma_;           // per slot
  std::vector<std::uint8_t> rank_;             // per slot, capped at ell
  std::vector<std::vector<std::uint8_t>> state_;  // [slot][level]
  std::vector<std::vector<std::uint32_t>> pos_;   // [slot][(level-1)*g + grid]
  std::mt19937_64 rng_;
  std::uint64_t n0_ = 2;
  std::uint64_t g_ = 1;
  std::uint64_t rebuilds_ = 0;
  bool low_trigger_armed_ = false;
};

}  // namespace dynkc
