#pragma once

// Brute-force linearizability oracle for small histories. Searches every
// real-time-respecting total order of a complete history and replays each
// against a sequential model; a history is linearizable iff some order
// replays successfully. States are memoized per (remaining-op set, model
// state) so equivalent search prefixes are explored once.
//
// Sequential nondeterminism (a basket put's spontaneous FULL, a take's
// free choice of element) collapses once the observed results are pinned:
// each (operation, result) pair either has a unique successor state or is
// impossible, which is what the models' try_* transitions encode.

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <unordered_set>
#include <vector>

#include "mbq/basket.hpp"
#include "mbq/common.hpp"
#include "mbq/history.hpp"
#include "mbq/llic.hpp"

namespace mbq {

struct LinearizeResult {
  bool linearizable = false;
  std::vector<std::uint64_t> witness;  // op ids in linearization order
};

// apply: (const State&, const OpRecord&) -> std::optional<State>
template <class State, class Apply>
LinearizeResult linearize(const std::vector<OpRecord>& ops, State initial,
                          Apply apply, std::size_t max_ops = 14) {
  if (ops.size() > max_ops) {
    throw SizeError("history of " + std::to_string(ops.size()) +
                    " operations exceeds the search limit of " +
                    std::to_string(max_ops));
  }
  const std::size_t n = ops.size();
  const std::uint32_t full = n == 0 ? 0 : (n >= 32 ? ~0u : (1u << n) - 1);

  std::unordered_set<detail::Key128, detail::Key128Hash> dead;
  std::vector<std::uint64_t> order;
  std::vector<std::uint64_t> buf;

  std::function<bool(std::uint32_t, const State&)> dfs =
      [&](std::uint32_t done_mask, const State& state) -> bool {
    if (done_mask == full) return true;
    buf.clear();
    buf.push_back(done_mask);
    state.encode(buf);
    if (!dead.insert(detail::mix_words(buf)).second) return false;

    // An op may come next iff no other unfinished op responded before it
    // was invoked.
    std::uint64_t min_resp = ~0ull;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(done_mask & (1u << i)) && ops[i].resp_ts < min_resp) {
        min_resp = ops[i].resp_ts;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (done_mask & (1u << i)) continue;
      if (ops[i].inv_ts > min_resp) continue;
      std::optional<State> next = apply(state, ops[i]);
      if (!next) continue;
      order.push_back(ops[i].op_id);
      if (dfs(done_mask | (1u << i), *next)) return true;
      order.pop_back();
    }
    return false;
  };

  LinearizeResult result;
  result.linearizable = dfs(0, initial);
  if (result.linearizable) result.witness = order;
  return result;
}

// --- model adapters -------------------------------------------------------

inline std::optional<LlicState> llic_try_apply(const LlicState& state,
                                               const OpRecord& op) {
  LlicState next = state;
  switch (op.kind) {
    case OpKind::Ll:
      if (op.result != ResultKind::Value) return std::nullopt;
      if (!next.try_load_link(op.process, op.result_value)) return std::nullopt;
      return next;
    case OpKind::Ic:
      if (!next.try_increment_conditional(op.process)) return std::nullopt;
      return next;
    default:
      return std::nullopt;
  }
}

inline std::optional<BasketState> basket_try_apply(const BasketState& state,
                                                   const OpRecord& op) {
  BasketState next = state;
  switch (op.kind) {
    case OpKind::Put:
      if (op.result == ResultKind::Ok || op.result == ResultKind::Full) {
        if (!next.try_put(op.arg, op.result == ResultKind::Ok)) return std::nullopt;
        return next;
      }
      return std::nullopt;
    case OpKind::Take:
      if (op.result == ResultKind::Value) {
        if (!next.try_take_item(op.result_value)) return std::nullopt;
        return next;
      }
      if (op.result == ResultKind::Closed) {
        if (!next.try_take_closed()) return std::nullopt;
        return next;
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

// FIFO list state for queue histories.
struct QueueState {
  std::deque<std::uint64_t> items;

  void encode(std::vector<std::uint64_t>& out) const {
    out.push_back(items.size());
    for (auto x : items) out.push_back(x);
  }

  bool operator==(const QueueState&) const = default;
};

inline std::optional<QueueState> queue_try_apply(const QueueState& state,
                                                 const OpRecord& op) {
  QueueState next = state;
  switch (op.kind) {
    case OpKind::Enq:
      if (op.result != ResultKind::Ok || !op.has_arg) return std::nullopt;
      next.items.push_back(op.arg);
      return next;
    case OpKind::Deq:
      if (op.result == ResultKind::Value) {
        if (next.items.empty() || next.items.front() != op.result_value) {
          return std::nullopt;
        }
        next.items.pop_front();
        return next;
      }
      if (op.result == ResultKind::Empty) {
        if (!next.items.empty()) return std::nullopt;
        return next;
      }
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

// --- convenience entry points ----------------------------------------------

inline LinearizeResult linearize_llic(const std::vector<OpRecord>& ops,
                                      std::uint32_t nprocs) {
  return linearize(ops, LlicState(nprocs), llic_try_apply);
}

inline LinearizeResult linearize_basket(const std::vector<OpRecord>& ops,
                                        std::uint32_t capacity) {
  return linearize(ops, BasketState(capacity), basket_try_apply);
}

inline LinearizeResult linearize_queue(const std::vector<OpRecord>& ops) {
  return linearize(ops, QueueState{}, queue_try_apply);
}

}  // namespace mbq
