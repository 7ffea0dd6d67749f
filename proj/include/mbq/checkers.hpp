#pragma once

// Aspect-oriented queue history checkers. A complete queue history is
// linearizable iff it is free of four violations:
//
//   VFresh  - a dequeue returns an item no enqueue inserted.
//   VRepeat - two dequeues return the item of the same enqueue.
//   VOrd    - items enqueued in strict real-time order come out
//             provably reordered: the later item's dequeue completes
//             before any dequeue of the earlier item starts.
//   VWit    - a dequeue returns empty although some item is present for
//             the whole duration of the call.
//
// The VWit check here flags only items provably present throughout the
// empty interval, so it is sound (never a false alarm) but not complete;
// full linearizability search is available separately at small scale.
//
// Every report carries concrete witnesses and can be re-verified from the
// raw history with recheck(), which deliberately shares no code with the
// efficient sweep implementations.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "mbq/history.hpp"

namespace mbq {

enum class Violation : std::uint8_t { VFresh, VRepeat, VOrd, VWit };

inline const char* violation_name(Violation v) {
  switch (v) {
    case Violation::VFresh: return "VFresh";
    case Violation::VRepeat: return "VRepeat";
    case Violation::VOrd: return "VOrd";
    case Violation::VWit: return "VWit";
  }
  return "?";
}

struct ViolationReport {
  Violation kind;
  std::vector<std::uint64_t> op_ids;  // the offending operations
  std::vector<std::uint64_t> items;   // the items demonstrating it
  std::string detail;
};

namespace detail {

constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

struct QueueOps {
  std::vector<OpRecord> enqs;              // only completed enq ops
  std::vector<OpRecord> deq_items;         // deqs returning an item
  std::vector<OpRecord> deq_empties;       // deqs returning empty
  // per enqueued item: earliest inv/resp over dequeues returning it
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> deqs_of;
};

inline QueueOps split_queue_ops(const std::vector<OpRecord>& ops) {
  QueueOps q;
  for (const auto& op : ops) {
    if (op.kind == OpKind::Enq) {
      q.enqs.push_back(op);
    } else if (op.kind == OpKind::Deq) {
      if (op.result == ResultKind::Value) {
        q.deqs_of[op.result_value].push_back(q.deq_items.size());
        q.deq_items.push_back(op);
      } else {
        q.deq_empties.push_back(op);
      }
    }
  }
  return q;
}

inline void require_unique_items(const QueueOps& q) {
  std::unordered_map<std::uint64_t, int> seen;
  for (const auto& e : q.enqs) {
    if (++seen[e.arg] > 1) {
      throw UsageError("duplicate enqueue argument " + std::to_string(e.arg) +
                       "; VOrd/VWit require unique items");
    }
  }
}

// Enqueues sorted by response time, with a prefix maximum over the
// earliest-dequeue-invocation of each item (kNever when never dequeued).
// max_before(t) answers: among items whose enqueue completed before t,
// which one stays undequeued the longest?
struct EnqSweep {
  struct Entry {
    std::uint64_t enq_resp;
    std::uint64_t deq_inv;   // earliest dequeue invocation, or kNever
    std::uint64_t item;
    std::uint64_t enq_op;
  };
  std::vector<Entry> by_resp;
  std::vector<std::size_t> prefix_argmax;

  EnqSweep(const QueueOps& q) {
    by_resp.reserve(q.enqs.size());
    for (const auto& e : q.enqs) {
      std::uint64_t deq_inv = kNever;
      auto it = q.deqs_of.find(e.arg);
      if (it != q.deqs_of.end()) {
        for (std::size_t i : it->second) {
          deq_inv = std::min(deq_inv, q.deq_items[i].inv_ts);
        }
      }
      by_resp.push_back({e.resp_ts, deq_inv, e.arg, e.op_id});
    }
    std::sort(by_resp.begin(), by_resp.end(),
              [](const Entry& a, const Entry& b) { return a.enq_resp < b.enq_resp; });
    prefix_argmax.resize(by_resp.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < by_resp.size(); ++i) {
      if (by_resp[i].deq_inv > by_resp[best].deq_inv) best = i;
      prefix_argmax[i] = best;
    }
  }

  // Entry with the latest earliest-dequeue among enqueues responding
  // strictly before t, or nullptr if none.
  const Entry* max_before(std::uint64_t t) const {
    auto it = std::lower_bound(
        by_resp.begin(), by_resp.end(), t,
        [](const Entry& a, std::uint64_t v) { return a.enq_resp < v; });
    if (it == by_resp.begin()) return nullptr;
    std::size_t last = static_cast<std::size_t>(it - by_resp.begin()) - 1;
    return &by_resp[prefix_argmax[last]];
  }
};

}  // namespace detail

// --- the four checkers ---------------------------------------------------

inline std::vector<ViolationReport> check_vfresh(const std::vector<OpRecord>& ops) {
  auto q = detail::split_queue_ops(ops);
  std::unordered_map<std::uint64_t, std::uint64_t> enq_of;
  for (const auto& e : q.enqs) enq_of.emplace(e.arg, e.op_id);
  std::vector<ViolationReport> reports;
  for (const auto& d : q.deq_items) {
    if (!enq_of.count(d.result_value)) {
      reports.push_back({Violation::VFresh,
                         {d.op_id},
                         {d.result_value},
                         "dequeue returned item " + std::to_string(d.result_value) +
                             " that no enqueue inserted"});
    }
  }
  return reports;
}

inline std::vector<ViolationReport> check_vrepeat(const std::vector<OpRecord>& ops) {
  auto q = detail::split_queue_ops(ops);
  std::vector<ViolationReport> reports;
  for (const auto& [item, idxs] : q.deqs_of) {
    if (idxs.size() >= 2) {
      ViolationReport r{Violation::VRepeat, {}, {item}, ""};
      for (std::size_t i : idxs) r.op_ids.push_back(q.deq_items[i].op_id);
      std::sort(r.op_ids.begin(), r.op_ids.end());
      r.detail = "item " + std::to_string(item) + " dequeued " +
                 std::to_string(idxs.size()) + " times";
      reports.push_back(std::move(r));
    }
  }
  std::sort(reports.begin(), reports.end(),
            [](const ViolationReport& a, const ViolationReport& b) {
              return a.items[0] < b.items[0];
            });
  return reports;
}

inline std::vector<ViolationReport> check_vord(const std::vector<OpRecord>& ops) {
  auto q = detail::split_queue_ops(ops);
  detail::require_unique_items(q);
  detail::EnqSweep sweep(q);

  std::unordered_map<std::uint64_t, const OpRecord*> enq_by_item;
  for (const auto& e : q.enqs) enq_by_item.emplace(e.arg, &e);

  // earliest-completing dequeue per item
  std::unordered_map<std::uint64_t, const OpRecord*> first_deq;
  for (const auto& d : q.deq_items) {
    auto [it, fresh] = first_deq.emplace(d.result_value, &d);
    if (!fresh && d.resp_ts < it->second->resp_ts) it->second = &d;
  }

  std::vector<ViolationReport> reports;
  for (const auto& [y, deq_y] : first_deq) {
    auto enq_y = enq_by_item.find(y);
    if (enq_y == enq_by_item.end()) continue;  // fabricated; VFresh's business
    // Is some x enqueued strictly before y, yet every dequeue of x starts
    // only after this dequeue of y completed?
    const auto* worst = sweep.max_before(enq_y->second->inv_ts);
    if (worst && worst->deq_inv > deq_y->resp_ts && worst->item != y) {
      reports.push_back(
          {Violation::VOrd,
           {worst->enq_op, enq_y->second->op_id, deq_y->op_id},
           {worst->item, y},
           "item " + std::to_string(worst->item) + " enqueued before " +
               std::to_string(y) + " but " + std::to_string(y) +
               " was dequeued before any dequeue of it started"});
    }
  }
  std::sort(reports.begin(), reports.end(),
            [](const ViolationReport& a, const ViolationReport& b) {
              return a.items[1] < b.items[1];
            });
  return reports;
}

inline std::vector<ViolationReport> check_vwit(const std::vector<OpRecord>& ops) {
  auto q = detail::split_queue_ops(ops);
  detail::require_unique_items(q);
  detail::EnqSweep sweep(q);

  std::vector<ViolationReport> reports;
  for (const auto& d : q.deq_empties) {
    // An item enqueued before the call began whose dequeue (if any)
    // starts only after the call returned is present throughout.
    const auto* worst = sweep.max_before(d.inv_ts);
    if (worst && worst->deq_inv > d.resp_ts) {
      reports.push_back(
          {Violation::VWit,
           {worst->enq_op, d.op_id},
           {worst->item},
           "dequeue returned empty although item " + std::to_string(worst->item) +
               " was present for the whole call"});
    }
  }
  return reports;
}

inline std::vector<ViolationReport> check_all(const std::vector<OpRecord>& ops) {
  std::vector<ViolationReport> all;
  for (auto& r : check_vfresh(ops)) all.push_back(std::move(r));
  for (auto& r : check_vrepeat(ops)) all.push_back(std::move(r));
  for (auto& r : check_vord(ops)) all.push_back(std::move(r));
  for (auto& r : check_vwit(ops)) all.push_back(std::move(r));
  return all;
}

inline std::vector<ViolationReport> check_vfresh(const History& h) {
  return check_vfresh(pair_operations(h));
}
inline std::vector<ViolationReport> check_vrepeat(const History& h) {
  return check_vrepeat(pair_operations(h));
}
inline std::vector<ViolationReport> check_vord(const History& h) {
  return check_vord(pair_operations(h));
}
inline std::vector<ViolationReport> check_vwit(const History& h) {
  return check_vwit(pair_operations(h));
}
inline std::vector<ViolationReport> check_all(const History& h) {
  return check_all(pair_operations(h));
}

// --- independent re-verification ------------------------------------------

// Confirms a report against the raw history by direct scanning, with none
// of the sweep machinery above.
inline bool recheck(const History& history, const ViolationReport& report) {
  auto ops = pair_operations(history);
  auto find_op = [&](std::uint64_t id) -> const OpRecord* {
    for (const auto& op : ops) {
      if (op.op_id == id) return &op;
    }
    return nullptr;
  };
  auto deqs_returning = [&](std::uint64_t item) {
    std::vector<const OpRecord*> out;
    for (const auto& op : ops) {
      if (op.kind == OpKind::Deq && op.result == ResultKind::Value &&
          op.result_value == item) {
        out.push_back(&op);
      }
    }
    return out;
  };

  switch (report.kind) {
    case Violation::VFresh: {
      if (report.op_ids.size() != 1 || report.items.size() != 1) return false;
      const OpRecord* d = find_op(report.op_ids[0]);
      if (!d || d->kind != OpKind::Deq || d->result != ResultKind::Value ||
          d->result_value != report.items[0]) {
        return false;
      }
      for (const auto& op : ops) {
        if (op.kind == OpKind::Enq && op.arg == report.items[0]) return false;
      }
      return true;
    }
    case Violation::VRepeat: {
      if (report.items.size() != 1 || report.op_ids.size() < 2) return false;
      auto ds = deqs_returning(report.items[0]);
      std::size_t matched = 0;
      for (std::uint64_t id : report.op_ids) {
        for (const auto* d : ds) {
          if (d->op_id == id) ++matched;
        }
      }
      return matched == report.op_ids.size() && matched >= 2;
    }
    case Violation::VOrd: {
      if (report.op_ids.size() != 3 || report.items.size() != 2) return false;
      const OpRecord* enq_x = find_op(report.op_ids[0]);
      const OpRecord* enq_y = find_op(report.op_ids[1]);
      const OpRecord* deq_y = find_op(report.op_ids[2]);
      if (!enq_x || !enq_y || !deq_y) return false;
      if (enq_x->kind != OpKind::Enq || enq_x->arg != report.items[0]) return false;
      if (enq_y->kind != OpKind::Enq || enq_y->arg != report.items[1]) return false;
      if (deq_y->kind != OpKind::Deq || deq_y->result != ResultKind::Value ||
          deq_y->result_value != report.items[1]) {
        return false;
      }
      if (!(enq_x->resp_ts < enq_y->inv_ts)) return false;
      for (const auto* dx : deqs_returning(report.items[0])) {
        if (dx->inv_ts < deq_y->resp_ts) return false;
      }
      return true;
    }
    case Violation::VWit: {
      if (report.op_ids.size() != 2 || report.items.size() != 1) return false;
      const OpRecord* enq_x = find_op(report.op_ids[0]);
      const OpRecord* deq_e = find_op(report.op_ids[1]);
      if (!enq_x || !deq_e) return false;
      if (enq_x->kind != OpKind::Enq || enq_x->arg != report.items[0]) return false;
      if (deq_e->kind != OpKind::Deq || deq_e->result != ResultKind::Empty) return false;
      if (!(enq_x->resp_ts < deq_e->inv_ts)) return false;
      for (const auto* dx : deqs_returning(report.items[0])) {
        if (dx->inv_ts < deq_e->resp_ts) return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace mbq
