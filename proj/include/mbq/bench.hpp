#pragma once

// Microbenchmark and stress harness.
//
// The LL/IC benchmark has each thread repeat (load_link; work; ic; work)
// on one shared object, where work is a cycle adding random increments of
// one to five until a small limit is reached; the FAI baseline repeats
// (fetch_increment; work). Wall time is measured per thread around the
// parallel phase only and the maximum across threads is the run's time.
// Every run also asserts the final-state invariants, so a fast but wrong
// implementation fails loudly.
//
// The queue stress runner records a full history, feeds it to the four
// violation checkers, and enforces a watchdog: a run that does not finish
// in time is reported as a hang.

#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mbq/basket.hpp"
#include "mbq/checkers.hpp"
#include "mbq/common.hpp"
#include "mbq/history.hpp"
#include "mbq/llic.hpp"
#include "mbq/process.hpp"
#include "mbq/queue.hpp"

namespace mbq::bench {

// Busy work between shared-memory operations: counts up by uniform random
// increments from {1..5} until the limit is reached. Touches no shared
// memory. Returns the number of iterations (the distribution tests use it).
inline std::uint64_t random_work(SplitMix64& rng, std::uint32_t limit) {
  std::uint64_t counter = 0;
  std::uint64_t iterations = 0;
  while (counter < limit) {
    counter += rng.between(1, 5);
    ++iterations;
  }
  return iterations;
}

struct BenchConfig {
  std::string impl = "fai";  // fai | cas | rw | mixed | queue
  std::string llic = "cas";  // queue combos: cas | rw | mixed
  std::string basket = "fai-swap";  // queue combos: fai-swap | cas
  std::uint32_t threads = 1;
  std::uint64_t ops_per_thread = 100000;
  std::uint32_t work_limit = 25;
  std::uint32_t runs = 5;
  bool padding = false;
  std::uint32_t mixed_capacity = 2;
  std::uint64_t seed = 0;
  std::size_t segment_size = 1024;

  std::string label() const {
    return impl == "queue" ? "queue-" + llic + "+" + basket : impl;
  }

  void validate() const {
    if (threads == 0) throw UsageError("threads must be positive");
    if (ops_per_thread == 0) throw UsageError("ops per thread must be positive");
    if (work_limit == 0) throw UsageError("work limit must be positive");
    if (runs == 0) throw UsageError("runs must be positive");
    if (impl == "mixed" && mixed_capacity < 2) {
      throw UsageError("mixed capacity must be at least 2");
    }
    if (impl != "fai" && impl != "cas" && impl != "rw" && impl != "mixed" &&
        impl != "queue") {
      throw UsageError("unknown implementation '" + impl + "'");
    }
  }
};

struct BenchResult {
  BenchConfig config;
  std::vector<double> seconds;  // one entry per run
  double mean = 0;
  double stddev = 0;  // sample standard deviation

  void finalize() {
    double sum = 0;
    for (double s : seconds) sum += s;
    mean = seconds.empty() ? 0 : sum / static_cast<double>(seconds.size());
    if (seconds.size() < 2) {
      stddev = 0;
      return;
    }
    double acc = 0;
    for (double s : seconds) acc += (s - mean) * (s - mean);
    stddev = std::sqrt(acc / static_cast<double>(seconds.size() - 1));
  }
};

namespace detail {

// Runs `threads` workers through body(pid, handle) once each, started
// together behind a barrier; returns the longest per-thread wall time.
template <class Body>
double timed_parallel(ProcessSet& procs, std::uint32_t threads, Body&& body) {
  std::barrier gate(static_cast<std::ptrdiff_t>(threads));
  std::vector<double> durations(threads, 0.0);
  std::vector<std::thread> workers;
  workers.reserve(threads);
  for (std::uint32_t t = 0; t < threads; ++t) {
    workers.emplace_back([&, t] {
      ProcessHandle& h = procs[t];
      gate.arrive_and_wait();
      auto start = std::chrono::steady_clock::now();
      body(t, h);
      auto stop = std::chrono::steady_clock::now();
      durations[t] = std::chrono::duration<double>(stop - start).count();
    });
  }
  for (auto& w : workers) w.join();
  double max = 0;
  for (double d : durations) max = std::max(max, d);
  return max;
}

template <class F>
void with_llic(const BenchConfig& cfg, F&& f) {
  if (cfg.impl == "cas") {
    CasLlic obj(cfg.threads);
    f(obj);
  } else if (cfg.impl == "rw") {
    RwLlic obj(cfg.threads, cfg.padding);
    f(obj);
  } else if (cfg.impl == "mixed") {
    MixedLlic obj(cfg.threads, cfg.mixed_capacity, cfg.padding);
    f(obj);
  } else {
    throw UsageError("unknown LL/IC implementation '" + cfg.impl + "'");
  }
}

}  // namespace detail

// Applies f to a fresh queue assembled from the named LL/IC and basket
// implementations, with nprocs registered processes.
template <class F>
void with_queue(const std::string& llic, const std::string& basket,
                std::uint32_t nprocs, std::uint32_t mixed_capacity, bool padding,
                std::size_t segment_size, F&& f) {
  auto build = [&](auto llic_factory) {
    using Llic = typename decltype(llic_factory())::element_type;
    if (basket == "fai-swap") {
      BasketsQueue<Llic, FaiSwapBasket<Item>> q(
          nprocs, llic_factory,
          [nprocs] { return std::make_unique<FaiSwapBasket<Item>>(nprocs); },
          segment_size);
      f(q);
    } else if (basket == "cas") {
      BasketsQueue<Llic, CasBasket<Item>> q(
          nprocs, llic_factory,
          [nprocs] { return std::make_unique<CasBasket<Item>>(nprocs); },
          segment_size);
      f(q);
    } else {
      throw UsageError("unknown basket implementation '" + basket + "'");
    }
  };
  if (llic == "cas") {
    build([nprocs] { return std::make_unique<CasLlic>(nprocs); });
  } else if (llic == "rw") {
    build([nprocs, padding] { return std::make_unique<RwLlic>(nprocs, padding); });
  } else if (llic == "mixed") {
    build([nprocs, mixed_capacity, padding] {
      return std::make_unique<MixedLlic>(nprocs, mixed_capacity, padding);
    });
  } else if (llic == "model") {
    build([nprocs] { return std::make_unique<LlicModel>(nprocs); });
  } else {
    throw UsageError("unknown LL/IC implementation '" + llic + "'");
  }
}

// Model-backed queue (single-threaded use only), for differential runs.
template <class F>
void with_model_queue(std::uint32_t nprocs, std::size_t segment_size, F&& f) {
  BasketsQueue<LlicModel, BasketModel<Item>> q(
      nprocs, [nprocs] { return std::make_unique<LlicModel>(nprocs); },
      [nprocs] { return std::make_unique<BasketModel<Item>>(nprocs); }, segment_size);
  f(q);
}

inline BenchResult run_llic_bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchResult result{cfg, {}, 0, 0};
  for (std::uint32_t run = 0; run < cfg.runs; ++run) {
    ProcessSet procs(cfg.threads, mix_seed(cfg.seed, run));
    const std::uint64_t ops = cfg.ops_per_thread;
    double seconds = 0;

    if (cfg.impl == "fai") {
      FaiCounter counter(cfg.threads);
      seconds = detail::timed_parallel(procs, cfg.threads, [&](std::uint32_t, ProcessHandle& h) {
        for (std::uint64_t i = 0; i < ops; ++i) {
          counter.fetch_increment(h);
          random_work(h.rng(), cfg.work_limit);
        }
      });
      std::uint64_t expect = static_cast<std::uint64_t>(cfg.threads) * ops;
      if (counter.snapshot_value() != expect) {
        throw std::runtime_error("fai side-check failed: counter " +
                                 std::to_string(counter.snapshot_value()) +
                                 " != " + std::to_string(expect));
      }
    } else {
      detail::with_llic(cfg, [&](auto& obj) {
        seconds = detail::timed_parallel(procs, cfg.threads, [&](std::uint32_t, ProcessHandle& h) {
          for (std::uint64_t i = 0; i < ops; ++i) {
            obj.load_link(h);
            random_work(h.rng(), cfg.work_limit);
            obj.increment_conditional(h);
            random_work(h.rng(), cfg.work_limit);
          }
        });
        // Progress and boundedness on the final abstract value.
        std::uint64_t value = obj.snapshot_value();
        std::uint64_t total_ics = static_cast<std::uint64_t>(cfg.threads) * ops;
        if (value < ops || value > total_ics) {
          throw std::runtime_error(
              "ll/ic side-check failed: final value " + std::to_string(value) +
              " outside [" + std::to_string(ops) + ", " + std::to_string(total_ics) +
              "]");
        }
      });
    }
    result.seconds.push_back(seconds);
  }
  result.finalize();
  return result;
}

inline BenchResult run_queue_bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchResult result{cfg, {}, 0, 0};
  for (std::uint32_t run = 0; run < cfg.runs; ++run) {
    // threads enqueuers plus threads dequeuers
    const std::uint32_t workers = cfg.threads * 2;
    ProcessSet procs(workers, mix_seed(cfg.seed, run));
    const std::uint64_t ops = cfg.ops_per_thread;
    std::atomic<std::uint64_t> dequeued{0};

    with_queue(cfg.llic, cfg.basket, workers, cfg.mixed_capacity, cfg.padding,
               cfg.segment_size, [&](auto& q) {
      double seconds = detail::timed_parallel(procs, workers, [&](std::uint32_t t, ProcessHandle& h) {
        if (t < cfg.threads) {
          for (std::uint64_t i = 0; i < ops; ++i) {
            q.enqueue(h, (std::uint64_t(t) << 32) | (i + 1));
            random_work(h.rng(), cfg.work_limit);
          }
        } else {
          std::uint64_t got = 0;
          for (std::uint64_t i = 0; i < ops; ++i) {
            if (q.dequeue(h)) ++got;
            random_work(h.rng(), cfg.work_limit);
          }
          dequeued.fetch_add(got);
        }
      });

      std::uint64_t drained = 0;
      while (q.dequeue(procs[0])) ++drained;
      std::uint64_t enq_total = static_cast<std::uint64_t>(cfg.threads) * ops;
      if (dequeued.load() + drained != enq_total) {
        throw std::runtime_error("queue conservation failed: " +
                                 std::to_string(dequeued.load()) + " dequeued + " +
                                 std::to_string(drained) + " drained != " +
                                 std::to_string(enq_total) + " enqueued");
      }
      result.seconds.push_back(seconds);
    });
  }
  result.finalize();
  return result;
}

// --- CSV ------------------------------------------------------------------

inline void emit_csv(const std::vector<BenchResult>& results, std::ostream& out) {
  if (results.empty()) throw UsageError("no results to emit");
  out << "impl,threads,ops_per_thread,work_limit,padding,run,seconds,mean,stddev\n";
  char buf[128];
  for (const auto& r : results) {
    for (std::size_t run = 0; run < r.seconds.size(); ++run) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", r.seconds[run], r.mean,
                    r.stddev);
      out << r.config.label() << ',' << r.config.threads << ','
          << r.config.ops_per_thread << ',' << r.config.work_limit << ','
          << (r.config.padding ? 1 : 0) << ',' << run << ',' << buf << '\n';
    }
  }
}

inline void emit_csv(const std::vector<BenchResult>& results, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit_csv(results, out);
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

struct CsvRow {
  std::string impl;
  std::uint32_t threads;
  std::uint64_t ops_per_thread;
  std::uint32_t work_limit;
  bool padding;
  std::uint32_t run;
  double seconds;
  double mean;
  double stddev;
};

inline std::vector<CsvRow> load_csv(std::istream& in) {
  std::vector<CsvRow> rows;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv");
  if (line != "impl,threads,ops_per_thread,work_limit,padding,run,seconds,mean,stddev") {
    throw std::runtime_error("unexpected csv header: " + line);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    CsvRow row;
    std::string token;
    auto next = [&](std::string& out) {
      if (!std::getline(fields, out, ',')) throw std::runtime_error("short csv row");
    };
    next(row.impl);
    next(token);
    row.threads = static_cast<std::uint32_t>(std::stoul(token));
    next(token);
    row.ops_per_thread = std::stoull(token);
    next(token);
    row.work_limit = static_cast<std::uint32_t>(std::stoul(token));
    next(token);
    row.padding = token == "1";
    next(token);
    row.run = static_cast<std::uint32_t>(std::stoul(token));
    next(token);
    row.seconds = std::stod(token);
    next(token);
    row.mean = std::stod(token);
    next(token);
    row.stddev = std::stod(token);
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<CsvRow> load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return load_csv(in);
}

// --- stress with recording, checkers and watchdog ---------------------------

struct StressConfig {
  std::string llic = "cas";
  std::string basket = "fai-swap";
  std::uint32_t threads = 8;  // total workers, split into enqueuers/dequeuers
  std::uint64_t ops_per_thread = 10000;
  std::uint64_t seed = 0;
  std::uint32_t mixed_capacity = 2;
  bool padding = false;
  std::size_t segment_size = 1024;
  double watchdog_seconds = 60.0;
  bool yield_jitter = true;  // sprinkle scheduler yields for interleaving variety

  void validate() const {
    if (threads < 2) throw UsageError("stress needs at least 2 threads");
    if (ops_per_thread == 0) throw UsageError("ops per thread must be positive");
  }
};

struct StressReport {
  double seconds = 0;
  std::uint64_t enqueued = 0;
  std::uint64_t dequeued = 0;  // includes the quiescent drain
  std::vector<ViolationReport> violations;
  History history;
  bool conservation_ok = false;
  bool index_monotone = false;
  bool head_tail_ok = false;
  bool closed_below_head = false;
  bool progressed = false;  // completed-op counter grew between samples
  std::uint64_t progress_samples = 0;

  bool clean() const {
    return violations.empty() && conservation_ok && index_monotone && head_tail_ok &&
           closed_below_head;
  }
};

namespace detail {

// enq(x) finishing before enq(y) starts must put x in a strictly earlier
// basket than y.
inline bool check_index_monotone(
    const std::vector<OpRecord>& ops,
    const std::unordered_map<std::uint64_t, std::uint64_t>& index_of) {
  struct E {
    std::uint64_t inv, resp, index;
  };
  std::vector<E> enqs;
  for (const auto& op : ops) {
    if (op.kind != OpKind::Enq) continue;
    auto it = index_of.find(op.arg);
    if (it == index_of.end()) return false;
    enqs.push_back({op.inv_ts, op.resp_ts, it->second});
  }
  std::sort(enqs.begin(), enqs.end(), [](const E& a, const E& b) { return a.resp < b.resp; });
  std::vector<std::uint64_t> prefix_max(enqs.size());
  for (std::size_t i = 0; i < enqs.size(); ++i) {
    prefix_max[i] = std::max(enqs[i].index, i ? prefix_max[i - 1] : 0);
  }
  for (const E& y : enqs) {
    auto it = std::lower_bound(enqs.begin(), enqs.end(), y.inv,
                               [](const E& a, std::uint64_t v) { return a.resp < v; });
    if (it == enqs.begin()) continue;
    std::uint64_t before = prefix_max[static_cast<std::size_t>(it - enqs.begin()) - 1];
    if (before >= y.index) return false;
  }
  return true;
}

}  // namespace detail

// Runs one randomized stress round on the named combination, recording the
// whole history and checking it. A watchdog guards against hangs; tripping
// it terminates the process since stuck lock-free workers cannot be joined.
inline StressReport run_stress(const StressConfig& cfg) {
  cfg.validate();
  StressReport report;
  const std::uint32_t enqueuers = cfg.threads / 2 + cfg.threads % 2;
  const std::uint32_t workers = cfg.threads;
  const std::uint64_t ops = cfg.ops_per_thread;

  ProcessSet procs(workers, cfg.seed);
  Recorder recorder;
  std::atomic<std::uint64_t> completed{0};
  std::atomic<bool> done{false};

  std::mutex watchdog_mutex;
  std::condition_variable watchdog_cv;
  std::vector<std::uint64_t> samples;

  with_queue(cfg.llic, cfg.basket, workers, cfg.mixed_capacity, cfg.padding,
             cfg.segment_size, [&](auto& q) {
    RecordedQueue recorded(q, recorder);
    std::unordered_map<std::uint64_t, std::uint64_t> index_of;
    std::mutex index_mutex;

    std::thread watchdog([&] {
      std::unique_lock<std::mutex> lock(watchdog_mutex);
      auto deadline = std::chrono::steady_clock::now() +
                      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                          std::chrono::duration<double>(cfg.watchdog_seconds));
      while (!done.load()) {
        samples.push_back(completed.load());
        if (watchdog_cv.wait_until(lock, std::min(deadline,
                                                  std::chrono::steady_clock::now() +
                                                      std::chrono::milliseconds(100)),
                                   [&] { return done.load(); })) {
          break;
        }
        if (std::chrono::steady_clock::now() >= deadline) {
          std::fprintf(stderr,
                       "watchdog: stress run (%s + %s) did not finish within %.0fs; "
                       "aborting\n",
                       cfg.llic.c_str(), cfg.basket.c_str(), cfg.watchdog_seconds);
          std::fflush(stderr);
          std::_Exit(86);
        }
      }
      samples.push_back(completed.load());
    });

    double seconds = detail::timed_parallel(procs, workers, [&](std::uint32_t t, ProcessHandle& h) {
      std::vector<std::pair<std::uint64_t, std::uint64_t>> local_index;
      if (t < enqueuers) {
        local_index.reserve(ops);
        for (std::uint64_t i = 0; i < ops; ++i) {
          std::uint64_t item = (std::uint64_t(t + 1) << 40) | (i + 1);
          std::uint64_t index = recorded.enqueue(h, item);
          local_index.emplace_back(item, index);
          completed.fetch_add(1);
          if (cfg.yield_jitter && (h.rng().next() & 31) == 0) std::this_thread::yield();
        }
      } else {
        for (std::uint64_t i = 0; i < ops; ++i) {
          recorded.dequeue(h);
          completed.fetch_add(1);
          if (cfg.yield_jitter && (h.rng().next() & 31) == 0) std::this_thread::yield();
        }
      }
      if (!local_index.empty()) {
        std::lock_guard<std::mutex> lock(index_mutex);
        for (auto& [item, index] : local_index) index_of.emplace(item, index);
      }
    });

    // quiescent drain so conservation is checkable
    while (recorded.dequeue(procs[0])) {
    }

    {
      std::lock_guard<std::mutex> lock(watchdog_mutex);
      done.store(true);
    }
    watchdog_cv.notify_all();
    watchdog.join();

    report.seconds = seconds;
    report.history = recorder.snapshot();
    auto ops_view = pair_operations(report.history);
    for (const auto& op : ops_view) {
      if (op.kind == OpKind::Enq) ++report.enqueued;
      if (op.kind == OpKind::Deq && op.result == ResultKind::Value) ++report.dequeued;
    }
    report.violations = check_all(ops_view);
    report.conservation_ok = report.enqueued == report.dequeued;  // fully drained
    report.index_monotone = detail::check_index_monotone(ops_view, index_of);

    std::uint64_t head = q.head_value();
    std::uint64_t tail = q.tail_value();
    report.head_tail_ok = head <= tail + 1;
    report.closed_below_head = true;
    q.for_each_basket([&](std::uint64_t index, const auto& basket) {
      if (index < head && !basket.permanently_closed()) {
        report.closed_below_head = false;
      }
    });

    report.progress_samples = samples.size();
    report.progressed = samples.size() < 3 || samples.back() > samples.front();
  });

  return report;
}

}  // namespace mbq::bench
