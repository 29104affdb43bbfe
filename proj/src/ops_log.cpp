#include "dynkc/ops_log.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "dynkc/baselines.hpp"
#include "dynkc/highdim.hpp"
#include "dynkc/lowdim.hpp"
#include "json.hpp"

namespace dynkc {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') break;
    out.push_back(tok);
  }
  return out;
}

std::int64_t parse_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw OpsParseError(line, "expected an integer, got '" + s + "'");
  }
}

std::uint64_t parse_u64(const std::string& s, int line) {
  std::int64_t v = parse_int(s, line);
  if (v < 0) throw OpsParseError(line, "expected a nonnegative integer, got '" + s + "'");
  return static_cast<std::uint64_t>(v);
}

void parse_cfg(const std::vector<std::string>& toks, int line, Config& cfg) {
  for (std::size_t i = 1; i < toks.size(); ++i) {
    auto eq = toks[i].find('=');
    if (eq == std::string::npos)
      throw OpsParseError(line, "expected key=value, got '" + toks[i] + "'");
    std::string key = toks[i].substr(0, eq);
    std::string val = toks[i].substr(eq + 1);
    if (key == "d") {
      cfg.d = static_cast<int>(parse_int(val, line));
    } else if (key == "delta") {
      cfg.delta = parse_int(val, line);
    } else if (key == "mode") {
      if (val == "low")
        cfg.mode = Mode::low_dim;
      else if (val == "high")
        cfg.mode = Mode::high_dim;
      else
        throw OpsParseError(line, "mode must be 'low' or 'high', got '" + val + "'");
    } else if (key == "ell") {
      cfg.ell = static_cast<int>(parse_int(val, line));
    } else if (key == "seed") {
      cfg.seed = parse_u64(val, line);
    } else {
      throw OpsParseError(line, "unknown CFG key '" + key + "'");
    }
  }
}

Point parse_coords(const std::vector<std::string>& toks, std::size_t from, std::size_t count,
                   int line) {
  Point p;
  for (std::size_t i = 0; i < count; ++i) p.push_back(parse_int(toks[from + i], line));
  return p;
}

}  // namespace

OpsLog parse_ops(std::istream& in) {
  OpsLog log;
  bool have_cfg = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> toks = tokenize(line);
    if (toks.empty()) continue;
    if (toks[0] == "CFG") {
      if (have_cfg) throw OpsParseError(line_no, "duplicate CFG line");
      parse_cfg(toks, line_no, log.cfg);
      try {
        log.cfg.validate();
      } catch (const std::exception& e) {
        throw OpsParseError(line_no, e.what());
      }
      have_cfg = true;
      continue;
    }
    if (!have_cfg) throw OpsParseError(line_no, "operation before CFG header");
    std::size_t d = static_cast<std::size_t>(log.cfg.d);
    OpsLog::Op op;
    op.line = line_no;
    if (toks[0] == "I" || toks[0] == "D") {
      if (toks.size() != 1 + d)
        throw OpsParseError(line_no, "expected " + std::to_string(d) + " coordinates");
      op.kind = toks[0] == "I" ? OpsLog::Op::Kind::insert : OpsLog::Op::Kind::erase;
      op.coords = parse_coords(toks, 1, d, line_no);
    } else if (toks[0] == "Q") {
      if (toks.size() != 2 + d)
        throw OpsParseError(line_no,
                            "expected " + std::to_string(d) + " coordinates and k=<k>");
      op.kind = OpsLog::Op::Kind::query;
      op.coords = parse_coords(toks, 1, d, line_no);
      const std::string& kt = toks[1 + d];
      if (kt.rfind("k=", 0) != 0) throw OpsParseError(line_no, "expected k=<k>");
      op.k = parse_u64(kt.substr(2), line_no);
      if (op.k < 1) throw OpsParseError(line_no, "k must be >= 1");
    } else {
      throw OpsParseError(line_no, "unknown operation '" + toks[0] + "'");
    }
    if (!in_box(op.coords, log.cfg.d, log.cfg.delta))
      throw OpsParseError(line_no,
                          "coordinates outside the box: " + format_point(op.coords));
    log.ops.push_back(std::move(op));
  }
  if (!have_cfg) throw OpsParseError(line_no == 0 ? 1 : line_no, "missing CFG header");
  return log;
}

OpsLog parse_ops_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open ops file: " + path);
  return parse_ops(in);
}

std::unique_ptr<DynamicBackend> make_backend(const Config& cfg) {
  if (cfg.mode == Mode::low_dim) return std::make_unique<LowDimStructure>(cfg);
  return std::make_unique<HighDimStructure>(cfg);
}

RunResult run_ops(const OpsLog& log, const RunOptions& opts) {
  RunResult res;
  std::unique_ptr<DynamicBackend> backend = make_backend(log.cfg);
  std::ostringstream out;
  std::uint64_t query_index = 0;
  for (const auto& op : log.ops) {
    switch (op.kind) {
      case OpsLog::Op::Kind::insert:
        backend->insert(op.coords);
        break;
      case OpsLog::Op::Kind::erase:
        try {
          backend->erase(op.coords);
        } catch (const NotFoundError&) {
          res.warnings.push_back("line " + std::to_string(op.line) +
                                 ": delete of absent point " + format_point(op.coords));
          if (opts.strict) {
            res.aborted = true;
            res.output = out.str();
            return res;
          }
        }
        break;
      case OpsLog::Op::Kind::query:
        try {
          const PointRecord& rep = backend->cluster(op.coords, op.k);
          out << query_index << ' ' << rep.id;
          for (Coord c : rep.point) out << ' ' << c;
          out << '\n';
        } catch (const NotFoundError&) {
          res.warnings.push_back("line " + std::to_string(op.line) +
                                 ": query of absent point " + format_point(op.coords));
          if (opts.strict) {
            res.aborted = true;
            res.output = out.str();
            return res;
          }
        }
        ++query_index;
        break;
    }
  }
  res.output = out.str();
  return res;
}

namespace {

double alpha_for(const Config& cfg) {
  return cfg.mode == Mode::low_dim ? 2.0 : 2.0 * cfg.d * cfg.ell;
}

EvalReport::Checkpoint make_checkpoint(const DynamicBackend& backend, const Config& cfg,
                                       std::size_t op_index, const EvalOptions& opts) {
  EvalReport::Checkpoint cp;
  cp.op_index = op_index;
  cp.distinct = backend.distinct_count();
  cp.total = backend.total_count();
  cp.violations = validate_family(backend, alpha_for(cfg)).size();

  if (cp.distinct == 0) return cp;
  std::vector<Point> pts;
  for (const PointRecord* r : backend.level_members(0)) pts.push_back(r->point);

  bool oracle = !opts.no_oracle;
  if (oracle && (pts.size() > opts.diam_guard || pts.size() > opts.center_guard))
    throw OracleGuardError("instance size " + std::to_string(pts.size()) +
                           " exceeds the oracle size guard (use --no-oracle)");
  std::vector<SqDist> opt_diam;
  if (oracle) opt_diam = brute_force_opt_diam_sq_all(pts, opts.diam_guard);

  for (std::uint64_t k = 1; k <= cp.distinct; ++k) {
    EvalReport::PerK row;
    row.k = k;
    Clustering clus = clustering_at_k(backend, k);
    row.diam_cost = diameter_cost(pts, clus.member_partition());
    row.center_cost = center_cost(pts, clus.rep_points());
    if (oracle) {
      double od = std::sqrt(static_cast<double>(opt_diam[k - 1]));
      double oc = brute_force_opt_center(pts, k, opts.center_guard);
      row.opt_diam = od;
      row.opt_center = oc;
      row.ratio_diam = od > 0 ? row.diam_cost / od : (row.diam_cost > 0 ? HUGE_VAL : 1.0);
      row.ratio_center = oc > 0 ? row.center_cost / oc : (row.center_cost > 0 ? HUGE_VAL : 1.0);
      cp.worst_ratio = std::max({cp.worst_ratio, *row.ratio_diam, *row.ratio_center});
    }
    cp.per_k.push_back(row);
  }
  return cp;
}

}  // namespace

EvalReport eval_ops(const OpsLog& log, const EvalOptions& opts) {
  EvalReport report;
  report.cfg = log.cfg;
  std::unique_ptr<DynamicBackend> backend = make_backend(log.cfg);
  std::size_t applied = 0;
  for (const auto& op : log.ops) {
    switch (op.kind) {
      case OpsLog::Op::Kind::insert:
        backend->insert(op.coords);
        break;
      case OpsLog::Op::Kind::erase:
        try {
          backend->erase(op.coords);
        } catch (const NotFoundError&) {
        }
        break;
      case OpsLog::Op::Kind::query:
        break;  // queries carry no state
    }
    ++applied;
    if (opts.every && applied % opts.every == 0 && applied != log.ops.size())
      report.checkpoints.push_back(make_checkpoint(*backend, log.cfg, applied, opts));
  }
  if (opts.inject_corruption && backend->distinct_count() >= 2) {
    // damage the family on purpose: hoist every record to the top level
    for (const PointRecord* r : backend->level_members(0))
      backend->debug_force_height(r->point, backend->level_top());
  }
  report.checkpoints.push_back(make_checkpoint(*backend, log.cfg, applied, opts));
  for (const auto& cp : report.checkpoints) {
    report.worst_ratio = std::max(report.worst_ratio, cp.worst_ratio);
    report.total_violations += cp.violations;
  }
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  j["schema"] = 1;
  j["mode"] = cfg.mode == Mode::low_dim ? "low" : "high";
  j["d"] = cfg.d;
  j["delta"] = cfg.delta;
  j["ell"] = cfg.ell;
  j["seed"] = cfg.seed;
  j["worst_ratio"] = worst_ratio;
  j["violations"] = total_violations;
  j["checkpoints"] = nlohmann::ordered_json::array();
  for (const auto& cp : checkpoints) {
    nlohmann::ordered_json jc;
    jc["op_index"] = cp.op_index;
    jc["distinct"] = cp.distinct;
    jc["total"] = cp.total;
    jc["violations"] = cp.violations;
    jc["worst_ratio"] = cp.worst_ratio;
    jc["per_k"] = nlohmann::ordered_json::array();
    for (const auto& row : cp.per_k) {
      nlohmann::ordered_json jr;
      jr["k"] = row.k;
      jr["diam_cost"] = row.diam_cost;
      jr["center_cost"] = row.center_cost;
      if (row.opt_diam) jr["opt_diam"] = *row.opt_diam;
      if (row.opt_center) jr["opt_center"] = *row.opt_center;
      if (row.ratio_diam) jr["ratio_diam"] = *row.ratio_diam;
      if (row.ratio_center) jr["ratio_center"] = *row.ratio_center;
      jc["per_k"].push_back(jr);
    }
    j["checkpoints"].push_back(jc);
  }
  return j.dump(2) + "\n";
}

std::string EvalReport::to_csv() const {
  std::ostringstream os;
  os << "op_index,distinct,k,diam_cost,center_cost,opt_diam,opt_center,ratio_diam,"
        "ratio_center,violations\n";
  for (const auto& cp : checkpoints) {
    for (const auto& row : cp.per_k) {
      os << cp.op_index << ',' << cp.distinct << ',' << row.k << ',' << row.diam_cost << ','
         << row.center_cost << ',';
      if (row.opt_diam) os << *row.opt_diam;
      os << ',';
      if (row.opt_center) os << *row.opt_center;
      os << ',';
      if (row.ratio_diam) os << *row.ratio_diam;
      os << ',';
      if (row.ratio_center) os << *row.ratio_center;
      os << ',' << cp.violations << '\n';
    }
    if (cp.per_k.empty())
      os << cp.op_index << ',' << cp.distinct << ",,,,,,,," << cp.violations << '\n';
  }
  return os.str();
}

namespace {

std::vector<Point> generate_points(const BenchOptions& opts, std::uint64_t n,
                                   std::mt19937_64& rng) {
  std::vector<Point> pts;
  pts.reserve(n);
  int d = opts.cfg.d;
  Coord delta = opts.cfg.delta;
  if (opts.generator == "clustered" || opts.generator == "adversarial-delete") {
    std::uint64_t centers = std::max<std::uint64_t>(1, n / 400);
    std::vector<Point> anchor;
    for (std::uint64_t c = 0; c < centers; ++c) {
      Point p(d);
      for (auto& x : p) x = static_cast<Coord>(rng() % static_cast<std::uint64_t>(delta)) + 1;
      anchor.push_back(std::move(p));
    }
    Coord spread = std::max<Coord>(1, delta / 16);
    for (std::uint64_t i = 0; i < n; ++i) {
      const Point& base = anchor[rng() % anchor.size()];
      Point p(d);
      for (int t = 0; t < d; ++t) {
        Coord off = static_cast<Coord>(rng() % static_cast<std::uint64_t>(2 * spread + 1)) - spread;
        p[t] = std::clamp<Coord>(base[t] + off, 1, delta);
      }
      pts.push_back(std::move(p));
    }
  } else {  // uniform
    for (std::uint64_t i = 0; i < n; ++i) {
      Point p(d);
      for (auto& x : p) x = static_cast<Coord>(rng() % static_cast<std::uint64_t>(delta)) + 1;
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  if (opts.generator != "uniform" && opts.generator != "clustered" &&
      opts.generator != "adversarial-delete")
    throw std::invalid_argument("bench: unknown generator '" + opts.generator + "'");
  using clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (std::uint64_t n : opts.sizes) {
    if (n == 0) continue;
    std::mt19937_64 rng(opts.cfg.seed + n);
    std::vector<Point> pts = generate_points(opts, n, rng);
    auto backend = make_backend(opts.cfg);

    auto t0 = clock::now();
    for (const auto& p : pts) backend->insert(p);
    auto t1 = clock::now();

    std::uint64_t queries = std::min<std::uint64_t>(opts.queries, n);
    auto t2 = clock::now();
    for (std::uint64_t q = 0; q < queries; ++q) {
      const Point& p = pts[rng() % pts.size()];
      std::uint64_t k = rng() % backend->distinct_count() + 1;
      backend->cluster(p, k);
    }
    auto t3 = clock::now();

    std::uint64_t deletes = opts.deletes ? std::min<std::uint64_t>(opts.deletes, n) : n / 2;
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) order[i] = i;
    if (opts.generator != "adversarial-delete") {
      // random deletion order; adversarial-delete removes oldest first
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng() % i]);
    }
    auto t4 = clock::now();
    std::uint64_t deleted = 0;
    for (std::size_t idx : order) {
      if (deleted >= deletes) break;
      try {
        backend->erase(pts[idx]);
        ++deleted;
      } catch (const NotFoundError&) {
        // duplicate coordinates already fully removed
      }
    }
    auto t5 = clock::now();

    auto ns = [](auto a, auto b) {
      return static_cast<double>(
          std::chrono::duration_cast<std::chrono::nanoseconds>(b - a).count());
    };
    BenchRow row;
    row.n = n;
    row.insert_ns = ns(t0, t1) / static_cast<double>(n);
    row.query_ns = queries ? ns(t2, t3) / static_cast<double>(queries) : 0.0;
    row.delete_ns = deleted ? ns(t4, t5) / static_cast<double>(deleted) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string bench_csv(const BenchOptions& opts) {
  std::vector<BenchRow> rows = run_bench(opts);
  std::ostringstream os;
  os << "mode,generator,n,insert_ns,query_ns,delete_ns,insert_growth,query_growth,"
        "delete_growth\n";
  const BenchRow* prev = nullptr;
  for (const auto& row : rows) {
    os << (opts.cfg.mode == Mode::low_dim ? "low" : "high") << ',' << opts.generator << ','
       << row.n << ',' << row.insert_ns << ',' << row.query_ns << ',' << row.delete_ns;
    if (prev) {
      auto growth = [](double cur, double before) {
        return before > 0 ? cur / before : 0.0;
      };
      os << ',' << growth(row.insert_ns, prev->insert_ns) << ','
         << growth(row.query_ns, prev->query_ns) << ','
         << growth(row.delete_ns, prev->delete_ns);
    } else {
      os << ",,,";
    }
    os << '\n';
    prev = &row;
  }
  return os.str();
}

std::string dump_ops(const OpsLog& log) {
  std::unique_ptr<DynamicBackend> backend = make_backend(log.cfg);
  for (const auto& op : log.ops) {
    switch (op.kind) {
      case OpsLog::Op::Kind::insert:
        backend->insert(op.coords);
        break;
      case OpsLog::Op::Kind::erase:
        try {
          backend->erase(op.coords);
        } catch (const NotFoundError&) {
        }
        break;
      case OpsLog::Op::Kind::query:
        break;
    }
  }
  return export_dendrogram(*backend).to_text();
}

std::vector<Violation> validate_ops(const OpsLog& log, std::optional<double> alpha) {
  std::unique_ptr<DynamicBackend> backend = make_backend(log.cfg);
  for (const auto& op : log.ops) {
    switch (op.kind) {
      case OpsLog::Op::Kind::insert:
        backend->insert(op.coords);
        break;
      case OpsLog::Op::Kind::erase:
        try {
          backend->erase(op.coords);
        } catch (const NotFoundError&) {
        }
        break;
      case OpsLog::Op::Kind::query:
        break;
    }
  }
  return validate_family(*backend, alpha.value_or(alpha_for(log.cfg)));
}

}  // namespace dynkc
