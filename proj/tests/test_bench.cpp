#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "mbq/bench.hpp"

using namespace mbq;
using namespace mbq::bench;

namespace {

// Exact expected iteration count of the random-work loop by dynamic
// programming over the counter value: E[i] = 1 + mean of E[i + d] for
// d in 1..5, E[>= limit] = 0. Independent of the implementation.
double exact_expected_iterations(std::uint32_t limit) {
  std::vector<double> e(limit + 6, 0.0);
  for (int i = static_cast<int>(limit) - 1; i >= 0; --i) {
    double acc = 0;
    for (int d = 1; d <= 5; ++d) {
      acc += e[std::min<std::size_t>(i + d, limit)];
    }
    e[i] = 1.0 + acc / 5.0;
  }
  return e[0];
}

}  // namespace

TEST_CASE("random work loop") {
  SECTION("iteration count is always within the hard bounds") {
    SplitMix64 rng(7);
    for (int i = 0; i < 10000; ++i) {
      std::uint64_t iters = random_work(rng, 25);
      REQUIRE(iters >= 5);   // all increments were 5
      REQUIRE(iters <= 25);  // all increments were 1
    }
  }

  SECTION("mean iterations match the renewal expectation") {
    // frozen from the DP below; the naive limit/mean-increment guess of
    // 25/3 = 8.33 undershoots because the last increment overshoots the
    // limit
    const double expected = 8.777805119678757;
    REQUIRE(std::abs(exact_expected_iterations(25) - expected) < 1e-12);

    SplitMix64 rng(20240607);
    const int n = 1000000;
    double total = 0;
    for (int i = 0; i < n; ++i) total += static_cast<double>(random_work(rng, 25));
    double mean = total / n;
    CHECK(std::abs(mean - expected) < 0.1);
  }

  SECTION("fixed seed reproduces the exact iteration sequence") {
    SplitMix64 a(99), b(99);
    std::uint64_t total_a = 0, total_b = 0;
    for (int i = 0; i < 1000; ++i) total_a += random_work(a, 25);
    for (int i = 0; i < 1000; ++i) total_b += random_work(b, 25);
    CHECK(total_a == total_b);
  }
}

TEST_CASE("config validation") {
  BenchConfig cfg;
  cfg.threads = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.impl = "nope";
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.impl = "mixed";
  cfg.mixed_capacity = 1;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
}

TEST_CASE("llic bench runs and self-checks") {
  BenchConfig cfg;
  cfg.threads = 1;
  cfg.ops_per_thread = 1000;
  cfg.runs = 5;
  cfg.work_limit = 5;

  SECTION("single thread cas reaches exactly its op count") {
    cfg.impl = "cas";
    auto result = run_llic_bench(cfg);  // internal check pins value == 1000
    CHECK(result.seconds.size() == 5);
    CHECK(result.mean > 0);
  }

  SECTION("fai baseline is exact for multiple threads") {
    cfg.impl = "fai";
    cfg.threads = 4;
    cfg.runs = 2;
    CHECK_NOTHROW(run_llic_bench(cfg));
  }

  SECTION("rw and mixed bound checks hold under threads") {
    cfg.threads = 4;
    cfg.runs = 2;
    cfg.impl = "rw";
    CHECK_NOTHROW(run_llic_bench(cfg));
    cfg.impl = "mixed";
    CHECK_NOTHROW(run_llic_bench(cfg));
    cfg.impl = "rw";
    cfg.padding = true;
    CHECK_NOTHROW(run_llic_bench(cfg));
  }
}

TEST_CASE("queue bench conserves items") {
  BenchConfig cfg;
  cfg.impl = "queue";
  cfg.llic = "rw";
  cfg.basket = "fai-swap";
  cfg.threads = 2;  // two enqueuers + two dequeuers
  cfg.ops_per_thread = 2000;
  cfg.runs = 2;
  cfg.work_limit = 3;
  auto result = run_queue_bench(cfg);
  CHECK(result.seconds.size() == 2);
  for (double s : result.seconds) CHECK(s > 0);
}

TEST_CASE("csv output") {
  BenchConfig cfg;
  cfg.impl = "fai";
  cfg.threads = 2;
  BenchResult r{cfg, {0.125, 0.25, 0.5, 1.0, 2.0}, 0, 0};
  r.finalize();

  SECTION("one config with five runs gives five rows") {
    std::ostringstream out;
    emit_csv({r}, out);
    std::istringstream in(out.str());
    auto rows = load_csv(in);
    REQUIRE(rows.size() == 5);
    for (std::uint32_t i = 0; i < 5; ++i) {
      CHECK(rows[i].impl == "fai");
      CHECK(rows[i].run == i);
      CHECK(rows[i].seconds == r.seconds[i]);
    }
  }

  SECTION("mean and stddev recompute from the rows") {
    std::ostringstream out;
    emit_csv({r}, out);
    std::istringstream in(out.str());
    auto rows = load_csv(in);
    double mean = 0;
    for (const auto& row : rows) mean += row.seconds;
    mean /= static_cast<double>(rows.size());
    double acc = 0;
    for (const auto& row : rows) acc += (row.seconds - mean) * (row.seconds - mean);
    double stddev = std::sqrt(acc / static_cast<double>(rows.size() - 1));
    CHECK(std::abs(rows[0].mean - mean) <= 1e-9 * std::max(1.0, std::abs(mean)));
    CHECK(std::abs(rows[0].stddev - stddev) <= 1e-9 * std::max(1.0, std::abs(stddev)));
  }

  SECTION("file round trip reproduces identical numbers") {
    auto path = std::filesystem::temp_directory_path() / "mbq_csv_test.csv";
    emit_csv({r}, path.string());
    auto rows = load_csv(path.string());
    REQUIRE(rows.size() == 5);
    for (std::uint32_t i = 0; i < 5; ++i) {
      CHECK(rows[i].seconds == r.seconds[i]);
      CHECK(rows[i].mean == r.mean);
      CHECK(rows[i].stddev == r.stddev);
    }
    std::filesystem::remove(path);
  }

  SECTION("unwritable paths raise") {
    CHECK_THROWS(emit_csv({r}, "/nonexistent-dir/x.csv"));
  }

  SECTION("queue combos carry a compound label") {
    BenchConfig qc;
    qc.impl = "queue";
    qc.llic = "rw";
    qc.basket = "cas";
    CHECK(qc.label() == "queue-rw+cas");
  }
}

TEST_CASE("stress runner reports clean runs") {
  StressConfig cfg;
  cfg.llic = "cas";
  cfg.basket = "fai-swap";
  cfg.threads = 4;
  cfg.ops_per_thread = 500;
  cfg.seed = 7;
  auto report = bench::run_stress(cfg);
  CHECK(report.clean());
  CHECK(report.enqueued == 2 * 500);
  CHECK(report.dequeued == report.enqueued);  // drained at the end
  CHECK(report.violations.empty());
  CHECK(report.history.size() >= 4 * 500 * 2);
  CHECK(report.progressed);
}
