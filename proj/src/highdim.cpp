#include "dynkc/highdim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace dynkc {

namespace {

constexpr std::uint8_t S_OUTSIDE = 0;
constexpr std::uint8_t S_COVERED = 1;
constexpr std::uint8_t S_UNCOVERED = 2;
constexpr std::uint8_t S_MEMBER = 3;

// Little-endian unsigned bignum, just enough for the sampling predicate
// sigma^ell * n0^j <= 2^(64*ell), evaluated exactly.
struct BigU {
  std::vector<std::uint64_t> limbs;  // empty == 0, no leading zero limbs

  static BigU one() { return BigU{{1}}; }

  void mul(std::uint64_t v) {
    if (v == 0) {
      limbs.clear();
      return;
    }
    unsigned __int128 carry = 0;
    for (auto& l : limbs) {
      unsigned __int128 cur = (unsigned __int128)l * v + carry;
      l = static_cast<std::uint64_t>(cur);
      carry = cur >> 64;
    }
    if (carry) limbs.push_back(static_cast<std::uint64_t>(carry));
  }

  bool leq_pow_2_64(int e) const {  // value <= 2^(64*e)
    if (static_cast<int>(limbs.size()) < e + 1) return true;
    if (static_cast<int>(limbs.size()) > e + 1) return false;
    if (limbs[e] > 1) return false;
    for (int i = 0; i < e; ++i)
      if (limbs[i]) return false;
    return true;
  }
};

}  // namespace

ShiftedGridGeometry::ShiftedGridGeometry(int d, int level, Coord max_coord) {
  if (d < 1 || level < 0 || max_coord < 1)
    throw std::invalid_argument("ShiftedGridGeometry: bad arguments");
  using U = unsigned __int128;
  for (int prec = 32; prec >= 1; --prec) {
    U a = U(d) << (2 * prec);
    std::uint64_t s = isqrt_u128(a);
    std::uint64_t dnum = (U(s) * U(s) == a) ? s : s + 1;  // ceil(sqrt(d)*2^prec)
    int dbits = std::bit_width(dnum);
    int mul_shift = 64 + prec;
    int xbits = std::bit_width(static_cast<std::uint64_t>(max_coord));
    if (xbits + mul_shift > 126) continue;
    if (64 + dbits + level + 1 > 126) continue;
    if (dbits + level + 1 + 64 > 127) continue;
    prec_ = prec;
    mul_shift_ = mul_shift;
    sft_ = U(dnum) << (level + 1);
    den_ = U(dnum) << (level + 1 + 64);
    U top = (U(static_cast<std::uint64_t>(max_coord)) << mul_shift_) +
            U(~std::uint64_t(0)) * sft_;
    key_bits_ = std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(top / den_))));
    return;
  }
  throw std::invalid_argument("ShiftedGridGeometry: level too large for exact arithmetic");
}

std::uint64_t ShiftedGridGeometry::axis_cell(Coord x, std::uint64_t sigma) const {
  using U = unsigned __int128;
  U num = (U(static_cast<std::uint64_t>(x)) << mul_shift_) + U(sigma) * sft_;
  return static_cast<std::uint64_t>(num / den_);
}

SeparationResult separation_split_rate(int d, int level, const Point& p, const Point& q,
                                       std::uint64_t trials, std::uint64_t seed) {
  if (static_cast<int>(p.size()) != d || static_cast<int>(q.size()) != d)
    throw std::invalid_argument("separation_split_rate: dimension mismatch");
  Coord mx = 1;
  for (Coord c : p) {
    if (c < 0) throw std::invalid_argument("separation_split_rate: negative coordinate");
    mx = std::max(mx, c);
  }
  for (Coord c : q) {
    if (c < 0) throw std::invalid_argument("separation_split_rate: negative coordinate");
    mx = std::max(mx, c);
  }
  ShiftedGridGeometry geo(d, level, mx);
  std::mt19937_64 rng(seed);
  SeparationResult res;
  res.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    bool split = false;
    for (int a = 0; a < d; ++a) {
      std::uint64_t sigma = rng();
      if (geo.axis_cell(p[a], sigma) != geo.axis_cell(q[a], sigma)) split = true;
    }
    if (split) ++res.splits;
  }
  return res;
}

HighDimStructure::HighDimStructure(const Config& cfg)
    : DynamicBackend(cfg.d, cfg.delta), cfg_(cfg), rng_(cfg.seed) {
  cfg_.validate();
  int m = st_.level_top();
  geom_.reserve(m + 1);
  for (int i = 0; i <= m; ++i) {
    geom_.emplace_back(cfg_.d, i, cfg_.delta);
    if (i >= 1 && geom_[i].key_bits() * cfg_.d > 128)
      throw std::invalid_argument("highdim: grid key exceeds 128 bits; reduce d or delta");
  }
  n0_ = std::max<std::uint64_t>(cfg_.n0_hint, 2);
  g_ = static_cast<std::uint64_t>(
      std::ceil(cfg_.grid_count_factor * std::log2(static_cast<double>(n0_))));
  if (g_ < 1) g_ = 1;
  init_levels();
}

void HighDimStructure::init_levels() {
  int m = st_.level_top();
  levels_.assign(m + 1, {});
  // draw order is pinned: levels ascending, grids ascending, axes ascending
  for (int i = 1; i <= m; ++i) {
    levels_[i].resize(g_);
    for (auto& grid : levels_[i]) {
      grid.shift.resize(cfg_.d);
      for (auto& s : grid.shift) s = rng_();
    }
  }
}

void HighDimStructure::ensure_slot_arrays(std::uint32_t slot) {
  std::size_t need = slot + 1;
  if (sigma_.size() < need) {
    sigma_.resize(need);
    rank_.resize(need);
    state_.resize(need);
    pos_.resize(need);
  }
  int m = st_.level_top();
  state_[slot].assign(m + 1, S_OUTSIDE);
  pos_[slot].assign(static_cast<std::size_t>(m) * g_, 0);
}

int HighDimStructure::compute_rank(std::uint64_t sigma) const {
  BigU acc = BigU::one();
  for (int t = 0; t < cfg_.ell; ++t) acc.mul(sigma);
  int r = 0;
  for (int j = 1; j <= cfg_.ell; ++j) {
    acc.mul(n0_);
    if (!acc.leq_pow_2_64(cfg_.ell)) break;
    r = j;
  }
  return r;
}

HighDimStructure::CellKey HighDimStructure::key_for(const Point& p, int level,
                                                    int grid) const {
  const ShiftedGridGeometry& geo = geom_[level];
  const auto& shift = levels_[level][grid].shift;
  CellKey key = 0;
  int bits = geo.key_bits();
  for (int t = 0; t < cfg_.d; ++t)
    key = (key << bits) | CellKey(geo.axis_cell(p[t], shift[t]));
  return key;
}

HighDimStructure::Cell* HighDimStructure::find_cell(int level, int grid, CellKey key) {
  auto& cm = levels_[level][grid].cells;
  auto it = cm.find(key);
  return it == cm.end() ? nullptr : &it->second;
}

const HighDimStructure::Cell* HighDimStructure::find_cell(int level, int grid,
                                                          CellKey key) const {
  const auto& cm = levels_[level][grid].cells;
  auto it = cm.find(key);
  return it == cm.end() ? nullptr : &it->second;
}

void HighDimStructure::bucket_remove(int level, int grid, CellKey key,
                                     std::uint32_t slot) {
  auto& cm = levels_[level][grid].cells;
  auto it = cm.find(key);
  Cell& c = it->second;
  auto& v = c.by_rank[rank_[slot]];
  std::uint32_t pos = pos_[slot][pos_index(level, grid)];
  std::uint32_t moved = v.back();
  v[pos] = moved;
  v.pop_back();
  if (moved != slot) pos_[moved][pos_index(level, grid)] = pos;
  while (!c.by_rank.empty() && c.by_rank.back().empty()) c.by_rank.pop_back();
  if (c.by_rank.empty()) cm.erase(it);
}

void HighDimStructure::clear_designations(int level, std::uint32_t slot) {
  const Point& p = st_.record(slot).point;
  for (int g = 0; g < static_cast<int>(g_); ++g) {
    Cell* c = find_cell(level, g, key_for(p, level, g));
    if (c && c->designated == slot) c->designated = kNoSlot;
  }
}

bool HighDimStructure::has_designated_cellmate(int level, std::uint32_t slot) const {
  const Point& p = st_.record(slot).point;
  for (int g = 0; g < static_cast<int>(g_); ++g) {
    const Cell* c = find_cell(level, g, key_for(p, level, g));
    if (c && c->designated != kNoSlot) return true;
  }
  return false;
}

void HighDimStructure::process_admissions(int level, std::vector<std::uint32_t>& candidates,
                                          Delta& out) {
  std::sort(candidates.begin(), candidates.end(),
            [this](std::uint32_t a, std::uint32_t b) {
              return st_.record(a).id < st_.record(b).id;
            });
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  for (std::uint32_t y : candidates) {
    if (state_[y][level] != S_UNCOVERED) continue;
    if (has_designated_cellmate(level, y)) continue;
    const Point& yp = st_.record(y).point;
    for (int g = 0; g < static_cast<int>(g_); ++g)
      find_cell(level, g, key_for(yp, level, g))->designated = y;
    state_[y][level] = S_MEMBER;
    st_.set_height(y, level);
    out.added.push_back(y);
  }
}

void HighDimStructure::level_add(int level, std::uint32_t slot, Delta& out) {
  const Point& p = st_.record(slot).point;
  int r = rank_[slot];
  int G = static_cast<int>(g_);
  std::vector<CellKey> keys(G);
  std::vector<int> prem(G);  // max occupant rank per cell before this arrival
  for (int g = 0; g < G; ++g) {
    keys[g] = key_for(p, level, g);
    Cell& c = levels_[level][g].cells[keys[g]];
    prem[g] = c.max_rank();
    if (static_cast<int>(c.by_rank.size()) <= r) c.by_rank.resize(r + 1);
    pos_[slot][pos_index(level, g)] = static_cast<std::uint32_t>(c.by_rank[r].size());
    c.by_rank[r].push_back(slot);
  }

  // The arrival covers the previous top-rank occupants of every cell whose
  // max rank was below r; any designated among them loses membership.
  std::vector<std::uint32_t> evicted;
  for (int g = 0; g < G; ++g) {
    if (prem[g] < 0 || prem[g] >= r) continue;
    Cell& c = *find_cell(level, g, keys[g]);
    for (std::uint32_t y : c.by_rank[prem[g]]) {
      if (state_[y][level] == S_MEMBER)
        evicted.push_back(y);
      else
        state_[y][level] = S_COVERED;
    }
  }
  std::sort(evicted.begin(), evicted.end(), [this](std::uint32_t a, std::uint32_t b) {
    return st_.record(a).id < st_.record(b).id;
  });
  evicted.erase(std::unique(evicted.begin(), evicted.end()), evicted.end());

  std::vector<std::uint32_t> candidates;
  for (std::uint32_t q : evicted) {
    state_[q][level] = S_COVERED;
    clear_designations(level, q);
    st_.set_height(q, level - 1);
    out.removed.push_back(q);
    // occupants sharing a cell with the evicted member may now be admissible
    const Point& qp = st_.record(q).point;
    int qr = rank_[q];
    for (int g = 0; g < G; ++g) {
      const Cell* c = find_cell(level, g, key_for(qp, level, g));
      if (!c || c->max_rank() != qr) continue;  // a higher rank covers this cell
      for (std::uint32_t y : c->by_rank[qr])
        if (state_[y][level] == S_UNCOVERED) candidates.push_back(y);
    }
  }

  bool covered = false;
  for (int g = 0; g < G; ++g)
    if (prem[g] > r) covered = true;
  if (covered) {
    state_[slot][level] = S_COVERED;
  } else {
    bool blocked = false;
    for (int g = 0; g < G; ++g)
      if (find_cell(level, g, keys[g])->designated != kNoSlot) {
        blocked = true;
        break;
      }
    if (blocked) {
      state_[slot][level] = S_UNCOVERED;
    } else {
      for (int g = 0; g < G; ++g) find_cell(level, g, keys[g])->designated = slot;
      state_[slot][level] = S_MEMBER;
      st_.set_height(slot, level);
      out.added.push_back(slot);
    }
  }
  process_admissions(level, candidates, out);
}

bool HighDimStructure::level_detach(int level, std::uint32_t slot) {
  const Point& p = st_.record(slot).point;
  bool was_member = state_[slot][level] == S_MEMBER;
  if (was_member) clear_designations(level, slot);
  for (int g = 0; g < static_cast<int>(g_); ++g)
    bucket_remove(level, g, key_for(p, level, g), slot);
  state_[slot][level] = S_OUTSIDE;
  return was_member;
}

void HighDimStructure::level_repair_after_detach(int level, std::uint32_t slot,
                                                 bool was_member, Delta& out) {
  const Point& p = st_.record(slot).point;
  int r = rank_[slot];
  int G = static_cast<int>(g_);
  std::vector<std::uint32_t> candidates;
  for (int g = 0; g < G; ++g) {
    const Cell* c = find_cell(level, g, key_for(p, level, g));
    if (!c) continue;
    int m2 = c->max_rank();
    if (m2 < r) {
      // the departed record may have been the only higher-rank cover here
      for (std::uint32_t y : c->by_rank[m2]) {
        if (state_[y][level] != S_COVERED) continue;
        bool cov = false;
        const Point& yp = st_.record(y).point;
        for (int g2 = 0; g2 < G && !cov; ++g2) {
          const Cell* cy = find_cell(level, g2, key_for(yp, level, g2));
          if (cy && cy->max_rank() > rank_[y]) cov = true;
        }
        if (!cov) {
          state_[y][level] = S_UNCOVERED;
          candidates.push_back(y);
        }
      }
    } else if (m2 == r && was_member) {
      // designation freed; same-rank uncovered occupants may be admissible
      for (std::uint32_t y : c->by_rank[r])
        if (state_[y][level] == S_UNCOVERED) candidates.push_back(y);
    }
  }
  process_admissions(level, candidates, out);
}

void HighDimStructure::cascade(int start_level, Delta changes) {
  int m = st_.level_top();
  for (int i = start_level; i <= m && !changes.empty(); ++i) {
    auto by_id = [this](std::uint32_t a, std::uint32_t b) {
      return st_.record(a).id < st_.record(b).id;
    };
    std::sort(changes.removed.begin(), changes.removed.end(), by_id);
    std::sort(changes.added.begin(), changes.added.end(), by_id);
    Delta next;
    // detach every departing record before any repair runs, so a pending
    // removal can never be re-admitted through a stale table entry
    std::vector<bool> was_member(changes.removed.size());
    for (std::size_t j = 0; j < changes.removed.size(); ++j) {
      was_member[j] = level_detach(i, changes.removed[j]);
      if (was_member[j]) next.removed.push_back(changes.removed[j]);
    }
    for (std::size_t j = 0; j < changes.removed.size(); ++j)
      level_repair_after_detach(i, changes.removed[j], was_member[j], next);
    for (std::uint32_t s : changes.added) level_add(i, s, next);
    // only net membership changes move on to the next level
    std::unordered_map<std::uint32_t, int> net;
    for (std::uint32_t s : next.added) ++net[s];
    for (std::uint32_t s : next.removed) --net[s];
    Delta carried;
    for (auto [s, v] : net) {
      if (v > 0) carried.added.push_back(s);
      if (v < 0) carried.removed.push_back(s);
    }
    changes = std::move(carried);
  }
}

PointId HighDimStructure::insert(const Point& p) {
  if (!in_box(p, cfg_.d, cfg_.delta))
    throw std::invalid_argument("insert: point outside the box " + format_point(p));
  if (PointRecord* existing = st_.find(p)) return st_.add_copy(existing->slot);

  std::uint32_t slot = st_.create(p);
  ensure_slot_arrays(slot);
  sigma_[slot] = rng_();
  rank_[slot] = static_cast<std::uint8_t>(compute_rank(sigma_[slot]));
  Delta d0;
  d0.added.push_back(slot);
  cascade(1, d0);
  PointId id = st_.record(slot).id;
  maybe_rebuild();
  return id;
}

void HighDimStructure::erase(const Point& p) {
  PointRecord* rec = st_.find(p);
  if (!rec) throw NotFoundError("delete: point not stored: " + format_point(p));
  if (rec->multiplicity() > 1) {
    st_.remove_copy(rec->slot);
    return;
  }
  std::uint32_t slot = rec->slot;
  Delta d0;
  d0.removed.push_back(slot);
  cascade(1, d0);
  st_.erase_record(slot);
  maybe_rebuild();
}

void HighDimStructure::maybe_rebuild() {
  std::uint64_t n = st_.distinct_count();
  // the shrink trigger arms once the count first reaches the snapshot band,
  // so a fresh structure can grow into its size hint without rebuilding down
  if (2 * n >= n0_) low_trigger_armed_ = true;
  if (n > 2 * n0_ || (low_trigger_armed_ && 2 * n < n0_)) rebuild(n);
}

void HighDimStructure::rebuild(std::uint64_t n_now) {
  ++rebuilds_;
  n0_ = std::max<std::uint64_t>(n_now, 2);
  low_trigger_armed_ = true;
  g_ = static_cast<std::uint64_t>(
      std::ceil(cfg_.grid_count_factor * std::log2(static_cast<double>(n0_))));
  if (g_ < 1) g_ = 1;
  init_levels();
  st_.reset_heights();
  int m = st_.level_top();
  auto slots = st_.slots_by_id();
  for (std::uint32_t s : slots) {
    sigma_[s] = rng_();
    rank_[s] = static_cast<std::uint8_t>(compute_rank(sigma_[s]));
    state_[s].assign(m + 1, S_OUTSIDE);
    pos_[s].assign(static_cast<std::size_t>(m) * g_, 0);
  }
  for (std::uint32_t s : slots) {
    Delta d0;
    d0.added.push_back(s);
    cascade(1, d0);
  }
}

const PointRecord& HighDimStructure::parent_in_level(int i, const PointRecord& x) const {
  if (x.height >= i) return x;
  if (x.height == i - 1) return find_parent(x.point, i - 1);
  throw NotFoundError("parent_in_level: not a member of the level below");
}

const PointRecord& HighDimStructure::find_parent(const Point& p, int i) const {
  const PointRecord* rec = st_.find(p);
  if (!rec) throw NotFoundError("find_parent: point not stored: " + format_point(p));
  if (i < 0 || i >= st_.level_top())
    throw std::invalid_argument("find_parent: level out of range");
  if (rec->height < i)
    throw std::invalid_argument("find_parent: point is not a member of the level");

  int lvl = i + 1;
  int G = static_cast<int>(g_);
  std::uint32_t cur = rec->slot;
  while (true) {
    if (state_[cur][lvl] == S_MEMBER) return st_.record(cur);
    const Point& cp = st_.record(cur).point;
    int r = rank_[cur];
    // a strictly higher-rank cellmate is closer to the next level; take the
    // lowest grid holding one, then the smallest id
    std::uint32_t next = kNoSlot;
    for (int g = 0; g < G && next == kNoSlot; ++g) {
      const Cell* c = find_cell(lvl, g, key_for(cp, lvl, g));
      if (!c) continue;
      for (int j = r + 1; j <= c->max_rank(); ++j)
        for (std::uint32_t y : c->by_rank[j])
          if (next == kNoSlot || st_.record(y).id < st_.record(next).id) next = y;
    }
    if (next != kNoSlot) {
      cur = next;
      continue;
    }
    // uncovered: some cell holds a designated member
    for (int g = 0; g < G; ++g) {
      const Cell* c = find_cell(lvl, g, key_for(cp, lvl, g));
      if (c && c->designated != kNoSlot) return st_.record(c->designated);
    }
    throw NotFoundError("find_parent: no parent reachable (invariants violated)");
  }
}

HighDimStructure::LevelState HighDimStructure::level_state(const PointRecord& rec,
                                                           int level) const {
  if (level < 1 || level > st_.level_top())
    throw std::invalid_argument("level_state: level out of range");
  return static_cast<LevelState>(state_[rec.slot][level]);
}

const std::vector<std::uint64_t>& HighDimStructure::grid_shift(int level, int grid) const {
  return levels_[level][grid].shift;
}

unsigned __int128 HighDimStructure::cell_of(const Point& p, int level, int grid) const {
  return key_for(p, level, grid);
}

std::vector<HighDimStructure::CellSnapshot> HighDimStructure::snapshot_level(
    int level) const {
  std::vector<CellSnapshot> out;
  for (int g = 0; g < static_cast<int>(g_); ++g) {
    for (const auto& [key, cell] : levels_[level][g].cells) {
      CellSnapshot snap;
      snap.grid = g;
      snap.key = key;
      snap.ids_by_rank.resize(cell.by_rank.size());
      for (std::size_t r = 0; r < cell.by_rank.size(); ++r) {
        for (std::uint32_t s : cell.by_rank[r])
          snap.ids_by_rank[r].push_back(st_.record(s).id);
        std::sort(snap.ids_by_rank[r].begin(), snap.ids_by_rank[r].end());
      }
      if (cell.designated != kNoSlot) {
        snap.has_designated = true;
        snap.designated = st_.record(cell.designated).id;
      }
      out.push_back(std::move(snap));
    }
  }
  std::sort(out.begin(), out.end(), [](const CellSnapshot& a, const CellSnapshot& b) {
    if (a.grid != b.grid) return a.grid < b.grid;
    return a.key < b.key;
  });
  return out;
}

}  // namespace dynkc
