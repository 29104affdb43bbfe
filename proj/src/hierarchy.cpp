#include "dynkc/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace dynkc {

FamilyState::FamilyState(int d, Coord delta)
    : d_(d), delta_(delta), m_(level_count(d, delta)) {
  level_size_.assign(m_ + 1, 0);
  diff_.resize(m_ + 1);
}

const PointRecord* FamilyState::find(const Point& p) const {
  auto it = index_.find(p);
  return it == index_.end() ? nullptr : &records_[it->second];
}

PointRecord* FamilyState::find(const Point& p) {
  auto it = index_.find(p);
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::uint32_t FamilyState::create(const Point& p) {
  std::uint32_t slot;
  if (!free_.empty()) {
    slot = free_.back();
    free_.pop_back();
    records_[slot] = PointRecord{};
  } else {
    slot = static_cast<std::uint32_t>(records_.size());
    records_.emplace_back();
  }
  PointRecord& r = records_[slot];
  r.point = p;
  r.id = next_id_++;
  r.copy_ids.push_back(r.id);
  r.height = 0;
  r.slot = slot;
  index_.emplace(p, slot);
  ++total_copies_;
  ++level_size_[0];
  if (m_ >= 1) diff_[1].insert(r.id);
  return slot;
}

PointId FamilyState::add_copy(std::uint32_t slot) {
  PointId id = next_id_++;
  records_[slot].copy_ids.push_back(id);
  ++total_copies_;
  return id;
}

bool FamilyState::remove_copy(std::uint32_t slot) {
  PointRecord& r = records_[slot];
  r.copy_ids.pop_back();
  --total_copies_;
  return r.copy_ids.empty();
}

void FamilyState::erase_record(std::uint32_t slot) {
  PointRecord& r = records_[slot];
  if (r.height < m_) diff_[r.height + 1].erase(r.id);
  for (int i = 0; i <= r.height; ++i) --level_size_[i];
  total_copies_ -= r.copy_ids.size();
  index_.erase(r.point);
  r = PointRecord{};
  free_.push_back(slot);
}

void FamilyState::set_height(std::uint32_t slot, int new_height) {
  PointRecord& r = records_[slot];
  int old = r.height;
  if (old == new_height) return;
  if (old < m_) diff_[old + 1].erase(r.id);
  if (new_height < m_) diff_[new_height + 1].insert(r.id);
  if (new_height > old)
    for (int i = old + 1; i <= new_height; ++i) ++level_size_[i];
  else
    for (int i = new_height + 1; i <= old; ++i) --level_size_[i];
  r.height = new_height;
}

void FamilyState::reset_heights() {
  for (auto& r : records_) {
    if (!r.live()) continue;
    r.height = 0;
    r.parent = kNoSlot;
  }
  for (int i = 1; i <= m_; ++i) {
    level_size_[i] = 0;
    diff_[i].clear();
  }
  if (m_ >= 1)
    for (const auto& r : records_)
      if (r.live()) diff_[1].insert(r.id);
}

std::vector<std::uint32_t> FamilyState::slots_by_id() const {
  std::vector<std::uint32_t> out;
  out.reserve(index_.size());
  for (const auto& r : records_)
    if (r.live()) out.push_back(r.slot);
  std::sort(out.begin(), out.end(), [this](std::uint32_t a, std::uint32_t b) {
    return records_[a].id < records_[b].id;
  });
  return out;
}

void FamilyState::for_each_slot(const std::function<void(std::uint32_t)>& fn) const {
  for (const auto& r : records_)
    if (r.live()) fn(r.slot);
}

std::vector<const PointRecord*> StateBackedFamily::level_members(int i) const {
  std::vector<const PointRecord*> out;
  st_.for_each_slot([&](std::uint32_t slot) {
    const PointRecord& r = st_.record(slot);
    if (r.height >= i) out.push_back(&r);
  });
  std::sort(out.begin(), out.end(),
            [](const PointRecord* a, const PointRecord* b) { return a->id < b->id; });
  return out;
}

void StateBackedFamily::debug_force_height(const Point& p, int height) {
  PointRecord* r = st_.find(p);
  if (!r) throw NotFoundError("debug_force_height: point not stored");
  st_.set_height(r->slot, height);
}

const PointRecord& DynamicBackend::cluster(const Point& p, std::uint64_t k) const {
  return representative(*this, p, k);
}

const PointRecord& ancestor(const FamilyView& view, const Point& p, int i) {
  const PointRecord* cur = view.find(p);
  if (!cur) throw NotFoundError("ancestor: point not stored: " + format_point(p));
  if (i < 0 || i > view.level_top()) throw std::invalid_argument("ancestor: level out of range");
  for (int j = 1; j <= i; ++j) {
    if (cur->height >= j) continue;
    cur = &view.parent_in_level(j, *cur);
  }
  return *cur;
}

const PointRecord& representative(const FamilyView& view, const Point& p, std::uint64_t k) {
  if (k < 1) throw std::invalid_argument("representative: k must be >= 1");
  if (view.distinct_count() == 0) throw std::invalid_argument("representative: empty structure");
  const PointRecord* rec = view.find(p);
  if (!rec) throw NotFoundError("representative: point not stored: " + format_point(p));

  int m = view.level_top();
  int i = 0;
  while (i <= m && view.level_size(i) > k) ++i;
  // a valid family has level_size(M) <= 1 <= k; a damaged one may not, in
  // which case the top ancestor still answers the query
  if (i > m) return ancestor(view, p, m);
  if (i == 0) return *rec;

  const PointRecord& q = ancestor(view, p, i - 1);
  if (q.height >= i) return q;  // already a member of P_i
  std::uint64_t promoted = k - view.level_size(i);
  auto r = view.diff_rank(i, q.id);
  if (r && *r <= promoted) return q;  // one of the promoted representatives
  return view.parent_in_level(i, q);
}

std::vector<Point> Clustering::rep_points() const {
  std::vector<Point> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) out.push_back(c.rep_point);
  return out;
}

std::vector<std::vector<Point>> Clustering::member_partition() const {
  std::vector<std::vector<Point>> out;
  out.reserve(clusters.size());
  for (const auto& c : clusters) {
    std::vector<Point> part;
    part.reserve(c.members.size());
    for (const auto& m : c.members) part.push_back(m.first);
    out.push_back(std::move(part));
  }
  return out;
}

Clustering clustering_at_k(const FamilyView& view, std::uint64_t k) {
  if (view.distinct_count() == 0)
    throw std::invalid_argument("clustering_at_k: empty structure");
  if (k < 1 || k > view.distinct_count())
    throw std::invalid_argument("clustering_at_k: k out of range");

  std::map<PointId, Cluster> grouped;
  for (const PointRecord* rec : view.level_members(0)) {
    const PointRecord& rep = representative(view, rec->point, k);
    auto [it, fresh] = grouped.try_emplace(rep.id);
    if (fresh) {
      it->second.rep_id = rep.id;
      it->second.rep_point = rep.point;
    }
    it->second.members.emplace_back(rec->point, rec->multiplicity());
  }
  Clustering out;
  out.k = k;
  out.clusters.reserve(grouped.size());
  for (auto& [id, cluster] : grouped) out.clusters.push_back(std::move(cluster));
  return out;
}

std::string DendrogramExport::to_text() const {
  std::ostringstream os;
  os << "H " << level_top << ' ' << n_distinct << ' ' << n_total << '\n';
  for (std::size_t i = 0; i < level_sizes.size(); ++i)
    os << "S " << i << ' ' << level_sizes[i] << '\n';
  for (const auto& l : links)
    os << "L " << l.level << ' ' << l.child << ' ' << l.parent << '\n';
  return os.str();
}

DendrogramExport export_dendrogram(const FamilyView& view) {
  DendrogramExport out;
  out.level_top = view.level_top();
  out.n_distinct = view.distinct_count();
  out.n_total = view.total_count();
  if (out.n_distinct == 0) return out;
  out.level_sizes.resize(out.level_top + 1);
  for (int i = 0; i <= out.level_top; ++i) out.level_sizes[i] = view.level_size(i);
  for (int i = 1; i <= out.level_top; ++i) {
    for (const PointRecord* rec : view.level_members(i - 1)) {
      const PointRecord& par =
          rec->height >= i ? *rec : view.parent_in_level(i, *rec);
      out.links.push_back({i, rec->id, par.id});
    }
  }
  return out;
}

std::string Violation::describe() const {
  static const char* names[] = {"nesting",        "root_not_singleton", "separation",
                                "parent_distance", "ancestor_distance",  "missing_parent",
                                "size_mismatch",  "diff_mismatch"};
  std::ostringstream os;
  os << names[static_cast<int>(kind)] << " level=" << level << " a=" << a << " b=" << b
     << " measured=" << measured;
  return os.str();
}

std::vector<Violation> validate_family(const FamilyView& view, double alpha) {
  std::vector<Violation> out;
  int m = view.level_top();
  if (view.distinct_count() == 0) return out;

  bool alpha_integral = alpha == std::floor(alpha) && alpha >= 0;
  auto exceeds = [&](SqDist sq, double bound) {
    if (alpha_integral && bound == std::floor(bound)) {
      SqDist b = static_cast<SqDist>(bound);
      return sq > b * b;
    }
    return sqrtl(static_cast<long double>(sq)) > static_cast<long double>(bound) * (1 + 1e-12L);
  };

  std::vector<std::vector<const PointRecord*>> members(m + 1);
  for (int i = 0; i <= m; ++i) members[i] = view.level_members(i);

  if (members[m].size() != 1)
    out.push_back({Violation::Kind::root_not_singleton, m, 0, 0,
                   static_cast<double>(members[m].size())});

  for (int i = 1; i <= m; ++i) {
    // (a) nesting
    for (const PointRecord* rec : members[i])
      if (rec->height < i - 1)
        out.push_back({Violation::Kind::nesting, i, rec->id, 0, 0.0});
    // (b) pairwise separation above 2^i
    SqDist thresh = SqDist(1) << (2 * i);
    for (std::size_t a = 0; a < members[i].size(); ++a)
      for (std::size_t b = a + 1; b < members[i].size(); ++b) {
        SqDist sq = squared_distance(members[i][a]->point, members[i][b]->point);
        if (sq <= thresh)
          out.push_back({Violation::Kind::separation, i, members[i][a]->id,
                         members[i][b]->id,
                         static_cast<double>(sqrtl(static_cast<long double>(sq)))});
      }
    // (c) parent link length at most alpha * 2^i for the dropped records
    for (const PointRecord* rec : members[i - 1]) {
      if (rec->height >= i) continue;
      const PointRecord* par = nullptr;
      try {
        par = &view.parent_in_level(i, *rec);
      } catch (const std::exception&) {
        out.push_back({Violation::Kind::missing_parent, i, rec->id, 0, 0.0});
        continue;
      }
      if (par->height < i) {
        out.push_back({Violation::Kind::missing_parent, i, rec->id, par->id, 0.0});
        continue;
      }
      SqDist sq = squared_distance(rec->point, par->point);
      double bound = alpha * std::exp2(i);
      if (exceeds(sq, bound))
        out.push_back({Violation::Kind::parent_distance, i, rec->id, par->id,
                       static_cast<double>(sqrtl(static_cast<long double>(sq)))});
    }
    // cached sizes and diff sets
    if (view.level_size(i) != members[i].size())
      out.push_back({Violation::Kind::size_mismatch, i, 0, 0,
                     static_cast<double>(view.level_size(i))});
    for (const PointRecord* rec : members[i - 1]) {
      bool dropped = rec->height == i - 1;
      bool listed = view.diff_rank(i, rec->id).has_value();
      if (dropped != listed)
        out.push_back({Violation::Kind::diff_mismatch, i, rec->id, 0, 0.0});
    }
  }

  // ancestor chains: |x - p^i(x)| <= alpha * 2^(i+1)
  for (const PointRecord* rec : members[0]) {
    const PointRecord* cur = rec;
    for (int i = 1; i <= m; ++i) {
      if (cur->height < i) {
        try {
          cur = &view.parent_in_level(i, *cur);
        } catch (const std::exception&) {
          break;  // already reported as missing_parent
        }
      }
      if (cur->height < i) break;
      SqDist sq = squared_distance(rec->point, cur->point);
      double bound = alpha * std::exp2(i + 1);
      if (exceeds(sq, bound))
        out.push_back({Violation::Kind::ancestor_distance, i, rec->id, cur->id,
                       static_cast<double>(sqrtl(static_cast<long double>(sq)))});
    }
  }
  return out;
}

}  // namespace dynkc
