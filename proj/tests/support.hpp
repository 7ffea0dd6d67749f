#pragma once

// Shared helpers for the test suites: a trivial list-queue oracle,
// sequential differential drivers, hand-built histories, and history
// sweeps for the LL/IC real-time properties.

#include <deque>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "mbq/checkers.hpp"
#include "mbq/history.hpp"
#include "mbq/llic.hpp"
#include "mbq/process.hpp"

namespace testsupport {

// The FIFO oracle every sequential queue history must match.
class ListQueue {
 public:
  void enqueue(mbq::Item x) { items_.push_back(x); }
  std::optional<mbq::Item> dequeue() {
    if (items_.empty()) return std::nullopt;
    mbq::Item x = items_.front();
    items_.pop_front();
    return x;
  }
  std::size_t size() const { return items_.size(); }

 private:
  std::deque<mbq::Item> items_;
};

// Drives `ops` random enqueue/dequeue operations single-threaded against
// both the queue under test and the list oracle; returns false on the
// first mismatch.
template <class Queue>
bool sequential_fifo_matches(Queue& queue, mbq::ProcessSet& procs, std::uint64_t ops,
                             std::uint64_t seed, std::uint32_t nprocs) {
  mbq::SplitMix64 rng(seed);
  ListQueue oracle;
  std::uint64_t next_item = 1;
  for (std::uint64_t i = 0; i < ops; ++i) {
    mbq::ProcessHandle& h = procs[static_cast<std::uint32_t>(rng.below(nprocs))];
    if (rng.below(100) < 55) {
      queue.enqueue(h, next_item);
      oracle.enqueue(next_item);
      ++next_item;
    } else {
      std::optional<mbq::Item> got = queue.dequeue(h);
      std::optional<mbq::Item> want = oracle.dequeue();
      if (got != want) return false;
    }
  }
  // drain both to the end
  while (true) {
    std::optional<mbq::Item> got = queue.dequeue(procs[0]);
    std::optional<mbq::Item> want = oracle.dequeue();
    if (got != want) return false;
    if (!got) break;
  }
  return true;
}

// --- hand-built histories for the checker tests ---------------------------

class HistoryBuilder {
 public:
  std::uint64_t inv(std::uint32_t proc, const std::string& label) {
    std::uint64_t id = next_id_++;
    events_.push_back({ts_++, id, proc, "queue", mbq::EventKind::Invocation, label});
    return id;
  }
  void res(std::uint64_t op_id, std::uint32_t proc, const std::string& label) {
    events_.push_back({ts_++, op_id, proc, "queue", mbq::EventKind::Response, label});
  }
  // a whole operation occupying its own slot in time
  std::uint64_t op(std::uint32_t proc, const std::string& inv_label,
                   const std::string& res_label) {
    std::uint64_t id = inv(proc, inv_label);
    res(id, proc, res_label);
    return id;
  }
  const mbq::History& history() const { return events_; }

 private:
  mbq::History events_;
  std::uint64_t ts_ = 0;
  std::uint64_t next_id_ = 0;
};

// --- LL/IC real-time property sweeps ---------------------------------------

struct LlicHistoryChecks {
  bool per_process_monotone = true;   // one process's ll results never decrease
  bool cross_process_monotone = true; // a later-starting ll sees >= an earlier result
  bool progress_after_ic = true;      // ll after a completed (ll v; ic) sees >= v+1
  bool bounded_by_ic_starts = true;   // ll result <= ics started before it returned

  bool all() const {
    return per_process_monotone && cross_process_monotone && progress_after_ic &&
           bounded_by_ic_starts;
  }
};

// Sweeps a recorded ll/ic history (ops from pair_operations) in timestamp
// order. Each process's ops must be recorded in its program order, which
// holds for histories produced by one handle per thread.
inline LlicHistoryChecks check_llic_history(const std::vector<mbq::OpRecord>& ops) {
  LlicHistoryChecks checks;

  struct Ev {
    std::uint64_t ts;
    enum { LlInv, LlResp, IcInv, IcResp } kind;
    const mbq::OpRecord* op;
  };
  std::vector<Ev> events;
  for (const auto& op : ops) {
    if (op.kind == mbq::OpKind::Ll) {
      events.push_back({op.inv_ts, Ev::LlInv, &op});
      events.push_back({op.resp_ts, Ev::LlResp, &op});
    } else if (op.kind == mbq::OpKind::Ic) {
      events.push_back({op.inv_ts, Ev::IcInv, &op});
      events.push_back({op.resp_ts, Ev::IcResp, &op});
    }
  }
  std::sort(events.begin(), events.end(),
            [](const Ev& a, const Ev& b) { return a.ts < b.ts; });

  std::unordered_map<std::uint32_t, std::uint64_t> last_ll;  // per process
  std::unordered_map<std::uint32_t, std::uint64_t> linked;   // last ll value
  std::unordered_map<const mbq::OpRecord*, std::pair<std::uint64_t, std::uint64_t>>
      floors_at_inv;
  std::uint64_t ll_floor = 0;  // max ll result responded so far
  std::uint64_t ic_floor = 0;  // max linked+1 over completed ics
  std::uint64_t ic_started = 0;

  for (const Ev& e : events) {
    switch (e.kind) {
      case Ev::LlInv:
        floors_at_inv[e.op] = {ll_floor, ic_floor};
        break;
      case Ev::LlResp: {
        std::uint64_t v = e.op->result_value;
        auto it = last_ll.find(e.op->process);
        if (it != last_ll.end() && v < it->second) checks.per_process_monotone = false;
        last_ll[e.op->process] = v;
        linked[e.op->process] = v;
        auto [lf, icf] = floors_at_inv[e.op];
        if (v < lf) checks.cross_process_monotone = false;
        if (v < icf) checks.progress_after_ic = false;
        if (v > ic_started) checks.bounded_by_ic_starts = false;
        ll_floor = std::max(ll_floor, v);
        break;
      }
      case Ev::IcInv:
        ++ic_started;
        break;
      case Ev::IcResp:
        ic_floor = std::max(ic_floor, linked[e.op->process] + 1);
        break;
    }
  }
  return checks;
}

}  // namespace testsupport
