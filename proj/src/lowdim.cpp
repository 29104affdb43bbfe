#include "dynkc/lowdim.hpp"

#include <algorithm>
#include <bit>

namespace dynkc {

LowDimStructure::LowDimStructure(const Config& cfg)
    : DynamicBackend(cfg.d, cfg.delta), cfg_(cfg) {
  cfg_.validate();
  int m = st_.level_top();
  grids_.resize(m + 1);
  key_bits_.resize(m + 1);
  for (int i = 0; i <= m; ++i) {
    SqDist span = SqDist(cfg_.delta - 1) * SqDist(cfg_.delta - 1) * SqDist(cfg_.d);
    std::uint64_t max_index = isqrt_u128(span) >> i;
    key_bits_[i] = std::bit_width(max_index);
    if (key_bits_[i] * cfg_.d > 128)
      throw std::invalid_argument("lowdim: grid key exceeds 128 bits; reduce d or delta");
  }
}

std::uint64_t LowDimStructure::axis_cell(Coord x, int level) const {
  // floor((x-1)*sqrt(d)/2^i) == floor(sqrt((x-1)^2 * d)) >> i
  SqDist scaled = SqDist(x - 1) * SqDist(x - 1) * SqDist(cfg_.d);
  return isqrt_u128(scaled) >> level;
}

LowDimStructure::CellKey LowDimStructure::cell_key(const Point& p, int level) const {
  CellKey key = 0;
  int bits = key_bits_[level];
  for (Coord c : p) key = (key << bits) | CellKey(axis_cell(c, level));
  return key;
}

void LowDimStructure::grid_add(int level, std::uint32_t slot) {
  grids_[level][cell_key(st_.record(slot).point, level)].push_back(slot);
}

void LowDimStructure::grid_remove(int level, std::uint32_t slot) {
  CellKey key = cell_key(st_.record(slot).point, level);
  auto it = grids_[level].find(key);
  auto& bucket = it->second;
  bucket.erase(std::find(bucket.begin(), bucket.end(), slot));
  if (bucket.empty()) grids_[level].erase(it);
}

std::vector<std::uint32_t> LowDimStructure::probe_slots(const Point& p, int level) const {
  // Cells meeting the box of half-width 2^i around p cover every member
  // within distance 2^i; occupants still pass the exact distance test.
  Coord radius = Coord(1) << level;
  SqDist thresh = SqDist(1) << (2 * level);
  int d = cfg_.d;
  std::vector<std::uint64_t> lo(d), hi(d), cur(d);
  for (int t = 0; t < d; ++t) {
    lo[t] = axis_cell(std::max<Coord>(1, p[t] - radius), level);
    hi[t] = axis_cell(std::min<Coord>(cfg_.delta, p[t] + radius), level);
    cur[t] = lo[t];
  }
  std::vector<std::uint32_t> out;
  const CellMap& grid = grids_[level];
  int bits = key_bits_[level];
  while (true) {
    CellKey key = 0;
    for (int t = 0; t < d; ++t) key = (key << bits) | CellKey(cur[t]);
    auto it = grid.find(key);
    if (it != grid.end())
      for (std::uint32_t slot : it->second)
        if (squared_distance(st_.record(slot).point, p) <= thresh) out.push_back(slot);
    int t = d - 1;
    while (t >= 0 && cur[t] == hi[t]) {
      cur[t] = lo[t];
      --t;
    }
    if (t < 0) break;
    ++cur[t];
  }
  return out;
}

PointId LowDimStructure::insert(const Point& p) {
  if (!in_box(p, cfg_.d, cfg_.delta))
    throw std::invalid_argument("insert: point outside the box " + format_point(p));
  if (PointRecord* existing = st_.find(p)) return st_.add_copy(existing->slot);

  std::uint32_t slot = st_.create(p);
  if (children_.size() <= slot) children_.resize(slot + 1);
  children_[slot].clear();
  grid_add(0, slot);
  ascend(slot, 1);
  return st_.record(slot).id;
}

void LowDimStructure::ascend(std::uint32_t slot, int from_level) {
  int m = st_.level_top();
  for (int i = from_level; i <= m; ++i) {
    std::vector<std::uint32_t> cands = probe_slots(st_.record(slot).point, i);
    if (cands.empty()) {
      grid_add(i, slot);
      st_.set_height(slot, i);
      continue;
    }
    std::uint32_t best = cands[0];
    for (std::uint32_t c : cands)
      if (st_.record(c).id < st_.record(best).id) best = c;
    st_.record(slot).parent = best;
    children_[best].push_back(slot);
    return;
  }
  st_.record(slot).parent = kNoSlot;  // root of the top level
}

void LowDimStructure::unlink_child(std::uint32_t parent, std::uint32_t child) {
  auto& list = children_[parent];
  list.erase(std::find(list.begin(), list.end(), child));
}

void LowDimStructure::erase(const Point& p) {
  PointRecord* rec = st_.find(p);
  if (!rec) throw NotFoundError("delete: point not stored: " + format_point(p));
  std::uint32_t slot = rec->slot;
  if (rec->multiplicity() > 1) {
    st_.remove_copy(slot);
    return;
  }

  for (int i = 0; i <= rec->height; ++i) grid_remove(i, slot);
  if (rec->parent != kNoSlot) unlink_child(rec->parent, slot);

  // Former children resume their interrupted ascents, levels ascending and
  // ids ascending within a level.
  std::vector<std::uint32_t> orphans = children_[slot];
  children_[slot].clear();
  std::sort(orphans.begin(), orphans.end(), [this](std::uint32_t a, std::uint32_t b) {
    const PointRecord& ra = st_.record(a);
    const PointRecord& rb = st_.record(b);
    if (ra.height != rb.height) return ra.height < rb.height;
    return ra.id < rb.id;
  });
  st_.erase_record(slot);
  for (std::uint32_t q : orphans) ascend(q, st_.record(q).height + 1);
}

const PointRecord& LowDimStructure::parent_in_level(int i, const PointRecord& x) const {
  if (x.height >= i) return x;
  if (x.height == i - 1 && x.parent != kNoSlot) return st_.record(x.parent);
  throw NotFoundError("parent_in_level: no link stored");
}

std::vector<const PointRecord*> LowDimStructure::probe_level(const Point& p, int i) const {
  if (i < 0 || i > st_.level_top())
    throw std::invalid_argument("probe_level: level out of range");
  std::vector<const PointRecord*> out;
  for (std::uint32_t slot : probe_slots(p, i)) out.push_back(&st_.record(slot));
  std::sort(out.begin(), out.end(),
            [](const PointRecord* a, const PointRecord* b) { return a->id < b->id; });
  return out;
}

std::vector<PointId> LowDimStructure::children_of(const Point& p) const {
  const PointRecord* rec = st_.find(p);
  if (!rec) throw NotFoundError("children_of: point not stored");
  std::vector<PointId> out;
  for (std::uint32_t c : children_[rec->slot]) out.push_back(st_.record(c).id);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace dynkc
