#include <catch2/catch_amalgamated.hpp>

#include <barrier>
#include <memory>
#include <set>
#include <thread>
#include <vector>

#include "mbq/bench.hpp"
#include "mbq/queue.hpp"
#include "support.hpp"

using namespace mbq;

namespace {

using FsQueue = BasketsQueue<CasLlic, FaiSwapBasket<Item>>;

FsQueue make_fs_queue(std::uint32_t nprocs, std::size_t segment_size = 8) {
  return FsQueue(
      nprocs, [nprocs] { return std::make_unique<CasLlic>(nprocs); },
      [nprocs] { return std::make_unique<FaiSwapBasket<Item>>(nprocs); }, segment_size);
}

}  // namespace

TEST_CASE("fresh queue is empty") {
  auto q = make_fs_queue(2);
  ProcessSet procs(2, 1);
  CHECK_FALSE(q.dequeue(procs[0]).has_value());
  CHECK_FALSE(q.dequeue(procs[1]).has_value());
}

TEST_CASE("sequential fifo basics") {
  auto q = make_fs_queue(2);
  ProcessSet procs(2, 2);

  SECTION("single item round trip") {
    q.enqueue(procs[0], 7);
    CHECK(q.tail_value() >= 1);
    CHECK(q.dequeue(procs[1]) == Item{7});
    CHECK_FALSE(q.dequeue(procs[1]).has_value());
  }

  SECTION("three items come out in order") {
    q.enqueue(procs[0], 1);
    q.enqueue(procs[0], 2);
    q.enqueue(procs[0], 3);
    CHECK(q.dequeue(procs[1]) == Item{1});
    CHECK(q.dequeue(procs[1]) == Item{2});
    CHECK(q.dequeue(procs[1]) == Item{3});
    CHECK_FALSE(q.dequeue(procs[1]).has_value());
  }

  SECTION("sequential enqueues land in increasing baskets") {
    std::uint64_t a = q.enqueue(procs[0], 10);
    std::uint64_t b = q.enqueue(procs[0], 11);
    std::uint64_t c = q.enqueue(procs[1], 12);
    CHECK(a < b);
    CHECK(b < c);
  }
}

TEST_CASE("enqueue skips past a closed basket") {
  auto q = make_fs_queue(2);
  ProcessSet procs(2, 3);
  // Close basket 0 the way a racing dequeuer would have left it.
  CHECK_FALSE(q.basket_at(0).take(procs[1]).has_value());
  REQUIRE(q.basket_at(0).permanently_closed());

  std::uint64_t index = q.enqueue(procs[0], 42);
  CHECK(index == 1);  // first basket refused, the retry landed one later
  CHECK(q.dequeue(procs[0]) == Item{42});
  CHECK_FALSE(q.dequeue(procs[0]).has_value());
}

TEST_CASE("segmented array") {
  SECTION("indices map to stable slots across growth") {
    SegmentedBasketArray<FaiSwapBasket<Item>> arr(
        4, [] { return std::make_unique<FaiSwapBasket<Item>>(2); });
    FaiSwapBasket<Item>* first = &arr.at(0);
    FaiSwapBasket<Item>* far = &arr.at(42);
    CHECK(arr.segment_count() == 11);  // segments 0..10
    CHECK(&arr.at(0) == first);
    CHECK(&arr.at(42) == far);
    CHECK(&arr.at(41) != far);
  }

  SECTION("concurrent growth yields one segment per index range") {
    SegmentedBasketArray<FaiSwapBasket<Item>> arr(
        2, [] { return std::make_unique<FaiSwapBasket<Item>>(2); });
    const int threads = 4;
    std::vector<FaiSwapBasket<Item>*> seen(threads * 64);
    std::barrier gate(threads);
    std::vector<std::thread> workers;
    for (int t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        gate.arrive_and_wait();
        for (int i = 0; i < 64; ++i) seen[t * 64 + i] = &arr.at(i);
      });
    }
    for (auto& w : workers) w.join();
    for (int i = 0; i < 64; ++i) {
      for (int t = 1; t < threads; ++t) {
        REQUIRE(seen[t * 64 + i] == seen[i]);
      }
    }
    CHECK(arr.segment_count() == 32);
  }
}

TEST_CASE("sequential random traces match the list oracle on every combination") {
  const std::uint32_t nprocs = 3;
  const std::uint64_t ops = 4000;
  for (const char* llic : {"cas", "rw", "mixed"}) {
    for (const char* basket : {"fai-swap", "cas"}) {
      CAPTURE(llic, basket);
      ProcessSet procs(nprocs, 5);
      bench::with_queue(llic, basket, nprocs, 2, false, 16, [&](auto& q) {
        CHECK(testsupport::sequential_fifo_matches(q, procs, ops, 99, nprocs));
      });
    }
  }
  // reference models composed under the same algorithm
  ProcessSet procs(nprocs, 5);
  bench::with_model_queue(nprocs, 16, [&](auto& q) {
    CHECK(testsupport::sequential_fifo_matches(q, procs, ops, 99, nprocs));
  });
}

TEST_CASE("handles beyond the registered count are rejected") {
  auto q = make_fs_queue(2);
  ProcessSet procs(3, 1);
  CHECK_THROWS_AS(q.enqueue(procs[2], 1), UsageError);
  CHECK_THROWS_AS(q.dequeue(procs[2]), UsageError);
}

TEST_CASE("small concurrent stress rounds are violation-free") {
  for (const char* llic : {"cas", "rw", "mixed"}) {
    for (const char* basket : {"fai-swap", "cas"}) {
      CAPTURE(llic, basket);
      bench::StressConfig cfg;
      cfg.llic = llic;
      cfg.basket = basket;
      cfg.threads = 4;
      cfg.ops_per_thread = 800;
      cfg.seed = 4242;
      cfg.segment_size = 64;
      auto report = bench::run_stress(cfg);
      CHECK(report.violations.empty());
      CHECK(report.conservation_ok);
      CHECK(report.index_monotone);
      CHECK(report.head_tail_ok);
      CHECK(report.closed_below_head);
      CHECK(report.progressed);
    }
  }
}

TEST_CASE("quiescent head and tail bounds after a busy run") {
  auto q = make_fs_queue(4, 16);
  ProcessSet procs(4, 6);
  std::barrier gate(4);
  std::vector<std::thread> workers;
  for (std::uint32_t t = 0; t < 4; ++t) {
    workers.emplace_back([&, t] {
      gate.arrive_and_wait();
      for (std::uint64_t i = 0; i < 500; ++i) {
        if (t < 2) {
          q.enqueue(procs[t], (std::uint64_t(t + 1) << 32) | i);
        } else {
          q.dequeue(procs[t]);
        }
      }
    });
  }
  for (auto& w : workers) w.join();

  std::uint64_t head = q.head_value();
  std::uint64_t tail = q.tail_value();
  CHECK(head <= tail + 1);
  std::size_t open_below_head = 0;
  q.for_each_basket([&](std::uint64_t index, const auto& basket) {
    if (index < head && !basket.permanently_closed()) ++open_below_head;
  });
  CHECK(open_below_head == 0);
}
