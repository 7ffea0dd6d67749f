#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <barrier>
#include <thread>
#include <vector>

#include "mbq/history.hpp"
#include "mbq/llic.hpp"
#include "support.hpp"

using namespace mbq;

namespace {

// Sequential differential driver: random (process, ll|ic) traces applied to
// the implementation and to the reference model must return the same
// values. ic is only issued by processes that have load-linked.
template <class Llic>
void differential_trace(Llic& obj, std::uint32_t nprocs, std::uint64_t ops,
                        std::uint64_t seed) {
  LlicModel model(nprocs);
  ProcessSet impl_procs(nprocs, seed);
  ProcessSet model_procs(nprocs, seed);
  SplitMix64 rng(seed ^ 0xabcdef);
  std::vector<bool> has_linked(nprocs, false);

  for (std::uint64_t i = 0; i < ops; ++i) {
    auto p = static_cast<std::uint32_t>(rng.below(nprocs));
    bool do_ll = !has_linked[p] || rng.below(2) == 0;
    if (do_ll) {
      std::uint64_t got = obj.load_link(impl_procs[p]);
      std::uint64_t want = model.load_link(model_procs[p]);
      REQUIRE(got == want);
      has_linked[p] = true;
    } else {
      obj.increment_conditional(impl_procs[p]);
      model.increment_conditional(model_procs[p]);
      REQUIRE(obj.snapshot_value() == model.snapshot_value());
    }
  }
}

// Hammers one object with threads running (ll; ic) pairs while recording,
// then sweeps the history for the real-time properties.
template <class Llic>
void concurrent_property_run(Llic& obj, std::uint32_t threads, std::uint64_t ops,
                             std::uint64_t seed) {
  ProcessSet procs(threads, seed);
  Recorder recorder;
  std::barrier gate(static_cast<std::ptrdiff_t>(threads));
  std::vector<std::thread> workers;
  for (std::uint32_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      ProcessHandle& h = procs[t];
      gate.arrive_and_wait();
      for (std::uint64_t i = 0; i < ops; ++i) {
        std::uint64_t op = recorder.invoke(t, "llic", "ll");
        std::uint64_t v = obj.load_link(h);
        recorder.respond(op, t, "llic", "ll " + std::to_string(v));
        op = recorder.invoke(t, "llic", "ic");
        obj.increment_conditional(h);
        recorder.respond(op, t, "llic", "ic ok");
        if ((h.rng().next() & 15) == 0) std::this_thread::yield();
      }
    });
  }
  for (auto& w : workers) w.join();

  auto checks = testsupport::check_llic_history(pair_operations(recorder.snapshot()));
  CHECK(checks.per_process_monotone);
  CHECK(checks.cross_process_monotone);
  CHECK(checks.progress_after_ic);
  CHECK(checks.bounded_by_ic_starts);

  std::uint64_t value = obj.snapshot_value();
  CHECK(value >= ops);
  CHECK(value <= static_cast<std::uint64_t>(threads) * ops);
}

}  // namespace

TEST_CASE("reference model sequential traces") {
  LlicModel model(2);
  ProcessSet procs(2, 1);

  SECTION("fresh object returns zero") {
    CHECK(model.load_link(procs[0]) == 0);
  }

  SECTION("ll,ic,ll,ic,ll by one process yields 0,1,2") {
    CHECK(model.load_link(procs[0]) == 0);
    model.increment_conditional(procs[0]);
    CHECK(model.load_link(procs[0]) == 1);
    model.increment_conditional(procs[0]);
    CHECK(model.load_link(procs[0]) == 2);
  }

  SECTION("second ic after a foreign increment is a no-op") {
    CHECK(model.load_link(procs[0]) == 0);
    CHECK(model.load_link(procs[1]) == 0);
    model.increment_conditional(procs[1]);
    model.increment_conditional(procs[0]);  // R moved since p's ll: no-op
    CHECK(model.load_link(procs[0]) == 1);
  }

  SECTION("two ics after a single ll increment once") {
    CHECK(model.load_link(procs[0]) == 0);
    model.increment_conditional(procs[0]);
    model.increment_conditional(procs[0]);  // own increment consumed the link
    CHECK(model.load_link(procs[0]) == 1);
  }

  SECTION("1000 (ll;ic) pairs reach 1000") {
    for (int i = 0; i < 1000; ++i) {
      model.load_link(procs[0]);
      model.increment_conditional(procs[0]);
    }
    CHECK(model.load_link(procs[0]) == 1000);
  }
}

TEMPLATE_TEST_CASE("implementation examples", "", CasLlic, RwLlic, MixedLlic) {
  auto make = [](std::uint32_t n) {
    if constexpr (std::is_same_v<TestType, MixedLlic>) {
      return TestType(n, 2);
    } else {
      return TestType(n);
    }
  };
  ProcessSet procs(3, 7);
  TestType obj = make(3);

  SECTION("fresh object returns zero for any process") {
    CHECK(obj.load_link(procs[0]) == 0);
    CHECK(obj.load_link(procs[2]) == 0);
  }

  SECTION("after one (ll;ic) any process reads at least 1") {
    obj.load_link(procs[0]);
    obj.increment_conditional(procs[0]);
    CHECK(obj.load_link(procs[1]) >= 1);
  }

  SECTION("sequential no-op ic after foreign increment") {
    CHECK(obj.load_link(procs[0]) == 0);
    CHECK(obj.load_link(procs[1]) == 0);
    obj.increment_conditional(procs[1]);
    obj.increment_conditional(procs[0]);
    CHECK(obj.load_link(procs[0]) == 1);
  }

  SECTION("usage errors") {
    ProcessSet more(4, 9);
    CHECK_THROWS_AS(obj.load_link(more[3]), UsageError);
    CHECK_THROWS_AS(obj.increment_conditional(procs[1]), UsageError);  // no ll yet
  }

  SECTION("sequential differential against the model") {
    differential_trace(obj, 3, 4000, 1234);
  }

  SECTION("sequential value never jumps by more than one") {
    SplitMix64 rng(5);
    std::vector<bool> has_linked(3, false);
    std::uint64_t prev = obj.snapshot_value();
    for (int i = 0; i < 2000; ++i) {
      auto p = static_cast<std::uint32_t>(rng.below(3));
      if (!has_linked[p] || rng.below(2) == 0) {
        obj.load_link(procs[p]);
        has_linked[p] = true;
      } else {
        obj.increment_conditional(procs[p]);
      }
      std::uint64_t now = obj.snapshot_value();
      REQUIRE(now >= prev);
      REQUIRE(now - prev <= 1);
      prev = now;
    }
  }
}

TEST_CASE("step bounds") {
  ProcessSet procs(4, 3);

  SECTION("cas: ll is one step, ic at most two") {
    CasLlic obj(4);
    obj.load_link(procs[0]);
    CHECK(procs[0].last_op_steps() == 1);
    obj.increment_conditional(procs[0]);
    CHECK(procs[0].last_op_steps() <= 2);
  }

  SECTION("rw: ll is n steps, ic at most n+1") {
    RwLlic obj(4);
    for (int round = 0; round < 50; ++round) {
      for (std::uint32_t p = 0; p < 4; ++p) {
        obj.load_link(procs[p]);
        CHECK(procs[p].last_op_steps() == 4);
        obj.increment_conditional(procs[p]);
        CHECK(procs[p].last_op_steps() <= 5);
      }
    }
  }

  SECTION("mixed: ll is K steps, ic at most four") {
    MixedLlic obj(4, 3);
    for (int round = 0; round < 50; ++round) {
      for (std::uint32_t p = 0; p < 4; ++p) {
        obj.load_link(procs[p]);
        CHECK(procs[p].last_op_steps() == 3);
        obj.increment_conditional(procs[p]);
        CHECK(procs[p].last_op_steps() <= 4);
      }
    }
  }
}

TEST_CASE("mixed capacity rules") {
  CHECK_THROWS_AS(MixedLlic(3, 1), UsageError);
  CHECK_THROWS_AS(MixedLlic(3, 0), UsageError);
  CHECK_NOTHROW(MixedLlic(3, 2));
  // K >= n works too; the K < n of the array-sharing design is a space
  // optimization, not a correctness requirement.
  CHECK_NOTHROW(MixedLlic(2, 4));
}

TEST_CASE("padding does not change sequential behavior") {
  RwLlic plain(3, false);
  RwLlic padded(3, true);
  ProcessSet a(3, 11), b(3, 11);
  SplitMix64 rng(77);
  std::vector<bool> linked(3, false);
  for (int i = 0; i < 3000; ++i) {
    auto p = static_cast<std::uint32_t>(rng.below(3));
    if (!linked[p] || rng.below(2) == 0) {
      REQUIRE(plain.load_link(a[p]) == padded.load_link(b[p]));
      linked[p] = true;
    } else {
      plain.increment_conditional(a[p]);
      padded.increment_conditional(b[p]);
      REQUIRE(plain.snapshot_value() == padded.snapshot_value());
    }
  }
}

TEST_CASE("fai counter") {
  ProcessSet procs(4, 1);

  SECTION("sequential tickets") {
    FaiCounter c(4);
    CHECK(c.fetch_increment(procs[0]) == 0);
    CHECK(c.fetch_increment(procs[1]) == 1);
    CHECK(c.fetch_increment(procs[0]) == 2);
    CHECK(procs[0].last_op_steps() == 1);
  }

  SECTION("T threads times N increments end at exactly T*N") {
    FaiCounter c(4);
    std::vector<std::thread> workers;
    const std::uint64_t n = 20000;
    for (std::uint32_t t = 0; t < 4; ++t) {
      workers.emplace_back([&, t] {
        for (std::uint64_t i = 0; i < n; ++i) c.fetch_increment(procs[t]);
      });
    }
    for (auto& w : workers) w.join();
    CHECK(c.snapshot_value() == 4 * n);
  }
}

TEST_CASE("concurrent real-time properties hold under stress") {
  const std::uint32_t threads = 4;
  const std::uint64_t ops = 3000;

  SECTION("cas") {
    CasLlic obj(threads);
    concurrent_property_run(obj, threads, ops, 101);
  }
  SECTION("rw") {
    RwLlic obj(threads);
    concurrent_property_run(obj, threads, ops, 102);
  }
  SECTION("mixed") {
    MixedLlic obj(threads, 2);
    concurrent_property_run(obj, threads, ops, 103);
  }
  SECTION("rw padded") {
    RwLlic obj(threads, true);
    concurrent_property_run(obj, threads, ops, 104);
  }
}
