#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dynkc/hierarchy.hpp"

// Operation-log ingestion and the replay/evaluation/benchmark entry points
// shared by the command line tool and the tests.
//
// Log format (line oriented, '#' starts a comment):
//   CFG d=<d> delta=<delta> mode=<low|high> ell=<ell> seed=<seed>
//   I x1 ... xd
//   D x1 ... xd
//   Q x1 ... xd k=<k>

namespace dynkc {

struct OpsParseError : std::runtime_error {
  OpsParseError(int line_no, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
  int line;
};

struct OracleGuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OpsLog {
  struct Op {
    enum class Kind { insert, erase, query };
    Kind kind = Kind::insert;
    Point coords;
    std::uint64_t k = 0;  // queries only
    int line = 0;
  };
  Config cfg;
  std::vector<Op> ops;
};

OpsLog parse_ops(std::istream& in);
OpsLog parse_ops_file(const std::string& path);

std::unique_ptr<DynamicBackend> make_backend(const Config& cfg);

struct RunOptions {
  bool strict = false;  // abort on delete/query of an absent point
};

struct RunResult {
  std::string output;                  // one line per query
  std::vector<std::string> warnings;   // absent-point reports
  bool aborted = false;
};

RunResult run_ops(const OpsLog& log, const RunOptions& opts = {});

struct EvalOptions {
  bool no_oracle = false;
  std::size_t every = 0;              // extra checkpoint every N operations
  std::size_t diam_guard = 14;
  std::size_t center_guard = 16;
  bool inject_corruption = false;     // testing: damage the family before validating
};

struct EvalReport {
  struct PerK {
    std::uint64_t k = 0;
    double diam_cost = 0.0;
    double center_cost = 0.0;
    std::optional<double> opt_diam;
    std::optional<double> opt_center;
    std::optional<double> ratio_diam;
    std::optional<double> ratio_center;
  };
  struct Checkpoint {
    std::size_t op_index = 0;  // operations applied so far
    std::uint64_t distinct = 0;
    std::uint64_t total = 0;
    std::vector<PerK> per_k;
    double worst_ratio = 0.0;
    std::size_t violations = 0;
  };
  Config cfg;
  std::vector<Checkpoint> checkpoints;
  double worst_ratio = 0.0;
  std::size_t total_violations = 0;

  std::string to_json() const;  // schema 1
  std::string to_csv() const;
};

EvalReport eval_ops(const OpsLog& log, const EvalOptions& opts = {});

struct BenchOptions {
  Config cfg;                      // d, delta, mode, ell, seed, grid_count_factor
  std::string generator = "uniform";  // uniform | clustered | adversarial-delete
  std::vector<std::uint64_t> sizes;
  std::uint64_t queries = 2000;
  std::uint64_t deletes = 0;       // 0 = half of n
};

struct BenchRow {
  std::uint64_t n = 0;
  double insert_ns = 0.0;
  double query_ns = 0.0;
  double delete_ns = 0.0;
};

std::vector<BenchRow> run_bench(const BenchOptions& opts);
std::string bench_csv(const BenchOptions& opts);

// Replays the log and returns the dendrogram serialization.
std::string dump_ops(const OpsLog& log);

// Replays the log and validates the family at the backend's guarantee
// (alpha = 2 in low mode, alpha = 2*d*ell in high mode) unless overridden.
std::vector<Violation> validate_ops(const OpsLog& log, std::optional<double> alpha = {});

}  // namespace dynkc
