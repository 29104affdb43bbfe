#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "dynkc/ops_log.hpp"

// dynkc — dynamic hierarchical k-center clustering over integer boxes.
//
// Exit codes: 0 success, 1 runtime/strict failure, 2 ops-file parse error,
// 3 oracle size guard exceeded.

namespace {

struct CommonFlags {
  std::string ops_path;
  std::optional<std::string> mode;
  std::optional<int> ell;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("ops", flags.ops_path, "operation log file")->required();
  cmd->add_option("--mode", flags.mode, "override backend: low | high");
  cmd->add_option("--ell", flags.ell, "override the sampling chain length");
  cmd->add_option("--seed", flags.seed, "override the RNG seed");
}

dynkc::OpsLog load(const CommonFlags& flags) {
  dynkc::OpsLog log = dynkc::parse_ops_file(flags.ops_path);
  if (flags.mode) {
    if (*flags.mode == "low")
      log.cfg.mode = dynkc::Mode::low_dim;
    else if (*flags.mode == "high")
      log.cfg.mode = dynkc::Mode::high_dim;
    else
      throw std::invalid_argument("--mode must be 'low' or 'high'");
  }
  if (flags.ell) log.cfg.ell = *flags.ell;
  if (flags.seed) log.cfg.seed = *flags.seed;
  log.cfg.validate();
  return log;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic hierarchical k-center clustering"};
  app.require_subcommand(1);

  CommonFlags run_flags, eval_flags, dump_flags, validate_flags;
  bool strict = false;
  CLI::App* run_cmd = app.add_subcommand("run", "replay an operation log, print query results");
  add_common(run_cmd, run_flags);
  run_cmd->add_flag("--strict", strict, "abort on delete/query of an absent point");

  bool no_oracle = false, inject = false;
  std::size_t every = 0;
  std::string csv_path;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "replay and compare per-k costs against exact optima");
  add_common(eval_cmd, eval_flags);
  eval_cmd->add_flag("--no-oracle", no_oracle, "skip the brute-force optima");
  eval_cmd->add_option("--every", every, "extra checkpoint every N operations");
  eval_cmd->add_option("--csv", csv_path, "also write the report as CSV to this file");
  eval_cmd->add_flag("--inject-corruption", inject,
                     "testing: damage the family before the final validation");

  CLI::App* dump_cmd = app.add_subcommand("dump", "replay and print the dendrogram");
  add_common(dump_cmd, dump_flags);

  std::optional<double> alpha;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "replay and check the family invariants");
  add_common(validate_cmd, validate_flags);
  validate_cmd->add_option("--alpha", alpha, "parent slack factor (default per backend)");

  dynkc::BenchOptions bench;
  std::string bench_mode = "low";
  CLI::App* bench_cmd = app.add_subcommand("bench", "amortized per-operation timings (CSV)");
  bench_cmd->add_option("--mode", bench_mode, "low | high")->capture_default_str();
  bench_cmd->add_option("--d", bench.cfg.d, "dimension")->capture_default_str();
  bench_cmd->add_option("--delta", bench.cfg.delta, "coordinate range")->required();
  bench_cmd->add_option("--ell", bench.cfg.ell, "sampling chain length")->capture_default_str();
  bench_cmd->add_option("--seed", bench.cfg.seed, "RNG seed")->capture_default_str();
  bench_cmd->add_option("--grid-factor", bench.cfg.grid_count_factor,
                        "grids per level = ceil(factor*log2(n0))")
      ->capture_default_str();
  bench_cmd->add_option("--generator", bench.generator,
                        "uniform | clustered | adversarial-delete")
      ->capture_default_str();
  bench_cmd->add_option("--sizes", bench.sizes, "point counts to measure")->required();
  bench_cmd->add_option("--queries", bench.queries, "queries per size")->capture_default_str();
  bench_cmd->add_option("--deletes", bench.deletes, "deletes per size (0 = half)")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) {
      dynkc::RunOptions opts;
      opts.strict = strict;
      dynkc::RunResult res = dynkc::run_ops(load(run_flags), opts);
      std::cout << res.output;
      for (const auto& w : res.warnings) std::cerr << w << '\n';
      return res.aborted ? 1 : 0;
    }
    if (*eval_cmd) {
      dynkc::EvalOptions opts;
      opts.no_oracle = no_oracle;
      opts.every = every;
      opts.inject_corruption = inject;
      dynkc::EvalReport report = dynkc::eval_ops(load(eval_flags), opts);
      std::cout << report.to_json();
      if (!csv_path.empty()) {
        std::ofstream out(csv_path);
        if (!out) throw std::runtime_error("cannot write " + csv_path);
        out << report.to_csv();
      }
      return 0;
    }
    if (*dump_cmd) {
      std::cout << dynkc::dump_ops(load(dump_flags));
      return 0;
    }
    if (*validate_cmd) {
      auto violations = dynkc::validate_ops(load(validate_flags), alpha);
      for (const auto& v : violations) std::cout << v.describe() << '\n';
      std::cout << violations.size() << " violation(s)\n";
      return violations.empty() ? 0 : 1;
    }
    if (*bench_cmd) {
      bench.cfg.mode = bench_mode == "high" ? dynkc::Mode::high_dim : dynkc::Mode::low_dim;
      bench.cfg.validate();
      std::cout << dynkc::bench_csv(bench);
      return 0;
    }
  } catch (const dynkc::OpsParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const dynkc::OracleGuardError& e) {
    std::cerr << "oracle guard: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
