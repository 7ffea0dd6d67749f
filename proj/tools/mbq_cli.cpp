// mbq command-line driver: microbenchmarks, randomized stress with
// violation checking, offline history checking, and exhaustive
// small-instance exploration against the sequential models.
//
// Exit codes: 0 success, 1 violation or non-linearizable history found,
// 2 usage error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mbq/bench.hpp"
#include "mbq/checkers.hpp"
#include "mbq/explore.hpp"
#include "mbq/history.hpp"
#include "mbq/linearize.hpp"

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MBQ_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;
}

void print_reports(const std::vector<mbq::ViolationReport>& reports) {
  for (const auto& r : reports) {
    std::cout << mbq::violation_name(r.kind) << ": " << r.detail << " (ops:";
    for (auto id : r.op_ids) std::cout << ' ' << id;
    std::cout << ")\n";
  }
}

int run_bench(const std::vector<std::string>& impls,
              const std::vector<std::uint32_t>& threads, mbq::bench::BenchConfig base,
              const std::string& llic, const std::string& basket,
              const std::string& out_path) {
  std::vector<mbq::bench::BenchResult> results;
  for (const auto& impl : impls) {
    for (std::uint32_t t : threads) {
      mbq::bench::BenchConfig cfg = base;
      cfg.impl = impl;
      cfg.llic = llic;
      cfg.basket = basket;
      cfg.threads = t;
      results.push_back(impl == "queue" ? mbq::bench::run_queue_bench(cfg)
                                        : mbq::bench::run_llic_bench(cfg));
      const auto& r = results.back();
      std::cerr << r.config.label() << " threads=" << t << " mean=" << r.mean
                << "s stddev=" << r.stddev << "s\n";
    }
  }
  if (out_path == "-") {
    mbq::bench::emit_csv(results, std::cout);
  } else {
    mbq::bench::emit_csv(results, out_path);
    std::cerr << "wrote " << out_path << "\n";
  }
  return 0;
}

int run_stress_command(mbq::bench::StressConfig cfg, std::uint32_t rounds,
                       const std::string& record_path) {
  for (std::uint32_t round = 0; round < rounds; ++round) {
    mbq::bench::StressConfig round_cfg = cfg;
    round_cfg.seed = mbq::mix_seed(cfg.seed, round);
    auto report = mbq::bench::run_stress(round_cfg);
    std::cout << "round " << round << ": " << report.enqueued << " enq / "
              << report.dequeued << " deq in " << report.seconds << "s, "
              << report.violations.size() << " violations\n";
    if (!record_path.empty()) {
      std::string path = rounds == 1 ? record_path
                                     : record_path + "." + std::to_string(round);
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
      mbq::write_history(report.history, out);
    }
    if (!report.clean()) {
      print_reports(report.violations);
      if (!report.conservation_ok) std::cout << "conservation check failed\n";
      if (!report.index_monotone) std::cout << "basket index monotonicity failed\n";
      if (!report.head_tail_ok) std::cout << "head/tail bound failed\n";
      if (!report.closed_below_head) std::cout << "open basket below head\n";
      return 1;
    }
  }
  std::cout << "all " << rounds << " stress rounds clean\n";
  return 0;
}

int run_check(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  mbq::History history = mbq::read_history(in);
  auto reports = mbq::check_all(history);
  if (reports.empty()) {
    std::cout << "history of " << history.size() << " events: no violations\n";
    return 0;
  }
  print_reports(reports);
  return 1;
}

struct ExploreSummary {
  std::uint64_t histories = 0;
  std::uint64_t executions = 0;
  std::uint64_t bad = 0;
};

template <class Machine, class Check>
void explore_into(typename Machine::Config cfg,
                  std::vector<std::vector<mbq::OpSpec>> programs,
                  mbq::ExploreOptions options, Check&& check, ExploreSummary& summary) {
  mbq::Explorer<Machine> explorer(cfg, std::move(programs), options);
  const auto& histories = explorer.run();
  summary.executions += explorer.stats().complete_executions;
  summary.histories += histories.size();
  for (const auto& ops : histories) {
    if (!check(ops)) {
      ++summary.bad;
      std::cout << "non-linearizable history:\n";
      for (const auto& op : ops) {
        std::cout << "  proc " << op.process << " op " << static_cast<int>(op.kind)
                  << " result " << static_cast<int>(op.result) << " value "
                  << op.result_value << "\n";
      }
    }
  }
}

int run_explore(const std::string& algo, std::uint32_t procs, std::uint32_t ops,
                std::uint32_t capacity, std::uint64_t budget) {
  mbq::ExploreOptions options;
  options.node_budget = budget;
  ExploreSummary summary;

  if (algo == "cas-llic" || algo == "rw-llic" || algo == "mixed-llic") {
    auto programs = mbq::llic_programs(procs, ops);
    auto check = [procs](const std::vector<mbq::OpRecord>& h) {
      return mbq::linearize_llic(h, procs).linearizable;
    };
    if (algo == "cas-llic") {
      explore_into<mbq::sim::CasLlicSim>({procs}, programs, options, check, summary);
    } else if (algo == "rw-llic") {
      explore_into<mbq::sim::RwLlicSim>({procs}, programs, options, check, summary);
    } else {
      explore_into<mbq::sim::MixedLlicSim>({procs, capacity}, programs, options, check,
                                           summary);
    }
  } else if (algo == "fai-swap" || algo == "cas-basket") {
    // every put/take role assignment, one operation per process
    for (std::uint32_t mask = 0; mask < (1u << procs); ++mask) {
      std::vector<bool> roles(procs);
      for (std::uint32_t p = 0; p < procs; ++p) roles[p] = (mask >> p) & 1;
      auto programs = mbq::basket_programs(roles);
      std::uint32_t k = algo == "fai-swap" ? capacity : procs;
      auto check = [k](const std::vector<mbq::OpRecord>& h) {
        return mbq::linearize_basket(h, k).linearizable;
      };
      if (algo == "fai-swap") {
        explore_into<mbq::sim::FaiSwapBasketSim>({procs, capacity}, programs, options,
                                                 check, summary);
      } else {
        explore_into<mbq::sim::CasBasketSim>({procs}, programs, options, check, summary);
      }
    }
  } else if (algo == "fai") {
    auto check = [](const std::vector<mbq::OpRecord>&) { return true; };
    explore_into<mbq::sim::FaiSim>({procs}, mbq::fai_programs(procs, ops), options,
                                   check, summary);
  } else {
    throw mbq::UsageError("unknown algorithm '" + algo + "'");
  }

  if (summary.bad == 0) {
    std::cout << "all " << summary.histories << " histories linearizable ("
              << summary.executions << " executions explored)\n";
    return 0;
  }
  std::cout << summary.bad << " of " << summary.histories
            << " histories NOT linearizable\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modular baskets queue toolbench"};
  app.require_subcommand(1);

  std::uint64_t seed = default_seed();
  app.add_option("--seed", seed, "master PRNG seed (default from MBQ_SEED)");

  // bench
  auto* bench = app.add_subcommand("bench", "run microbenchmarks, emit CSV");
  std::vector<std::string> impls{"fai"};
  std::vector<std::uint32_t> threads{1};
  mbq::bench::BenchConfig bench_cfg;
  std::string llic = "cas";
  std::string basket = "fai-swap";
  std::string out_path = "-";
  bench->add_option("--impl", impls, "fai|cas|rw|mixed|queue (repeatable)");
  bench->add_option("--threads", threads, "thread counts (repeatable)");
  bench->add_option("--ops", bench_cfg.ops_per_thread, "operations per thread");
  bench->add_option("--work-limit", bench_cfg.work_limit, "random work cycle limit");
  bench->add_option("--runs", bench_cfg.runs, "repetitions per configuration");
  bench->add_flag("--padding", bench_cfg.padding, "pad array cells to cache lines");
  bench->add_option("--k", bench_cfg.mixed_capacity, "mixed LL/IC cell count");
  bench->add_option("--llic", llic, "queue combo: cas|rw|mixed");
  bench->add_option("--basket", basket, "queue combo: fai-swap|cas");
  bench->add_option("--out", out_path, "CSV path ('-' for stdout)");

  // stress
  auto* stress = app.add_subcommand("stress", "randomized stress + checkers");
  mbq::bench::StressConfig stress_cfg;
  std::uint32_t rounds = 1;
  std::string record_path;
  stress->add_option("--llic", stress_cfg.llic, "cas|rw|mixed|model");
  stress->add_option("--basket", stress_cfg.basket, "fai-swap|cas");
  stress->add_option("--threads", stress_cfg.threads, "total worker threads");
  stress->add_option("--ops", stress_cfg.ops_per_thread, "operations per thread");
  stress->add_option("--rounds", rounds, "stress rounds");
  stress->add_option("--k", stress_cfg.mixed_capacity, "mixed LL/IC cell count");
  stress->add_option("--watchdog", stress_cfg.watchdog_seconds, "hang deadline, seconds");
  stress->add_option("--record-out", record_path, "write recorded history here");

  // check
  auto* check = app.add_subcommand("check", "check a serialized history");
  std::string history_path;
  check->add_option("--history", history_path, "history file")->required();

  // explore
  auto* explore = app.add_subcommand("explore", "exhaustive small-instance check");
  std::string algo = "cas-llic";
  std::uint32_t procs = 2;
  std::uint32_t ops = 2;
  std::uint32_t capacity = 2;
  std::uint64_t budget = 40'000'000;
  explore->add_option("--algo", algo,
                      "cas-llic|rw-llic|mixed-llic|fai-swap|cas-basket|fai");
  explore->add_option("--procs", procs, "process count (<= 3 advisable)");
  explore->add_option("--ops", ops, "ll/ic ops per process (alternating ll,ic)");
  explore->add_option("--k", capacity, "capacity for mixed-llic / fai-swap");
  explore->add_option("--budget", budget, "node budget");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (bench->parsed()) {
      bench_cfg.seed = seed;
      return run_bench(impls, threads, bench_cfg, llic, basket, out_path);
    }
    if (stress->parsed()) {
      stress_cfg.seed = seed;
      return run_stress_command(stress_cfg, rounds, record_path);
    }
    if (check->parsed()) {
      return run_check(history_path);
    }
    if (explore->parsed()) {
      return run_explore(algo, procs, ops, capacity, budget);
    }
  } catch (const mbq::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
