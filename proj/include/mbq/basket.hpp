#pragma once

// K-baskets: bounded bags where a put may spuriously fail and a take on an
// empty basket permanently closes it. The queue composes these under its
// LL/IC-managed head and tail.
//
// Two wait-free implementations:
//
//   FaiSwapBasket - put and take claim slot tickets with fetch-and-
//                   increment, so at most one put and one take ever meet
//                   at a slot, and the meeting is resolved with a single
//                   atomic exchange.
//   CasBasket     - every process owns one slot for its put; takes visit
//                   their own slot first and then randomly chosen
//                   untried slots, racing with CAS.
//
// Cells are tagged (empty / item / taken) with the payload in a side
// array published by the tag transition, so no item value is reserved as
// a sentinel. All shared-memory accesses are sequentially consistent.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "mbq/common.hpp"
#include "mbq/process.hpp"

namespace mbq {

enum class PutStatus : std::uint8_t { Ok, Full };

enum class CellTag : std::uint8_t { Empty, Stored, Taken };

// --- Sequential reference model ---------------------------------------

// Abstract basket state (S, C) over 64-bit items, in the result-checking
// form the linearization oracle needs: each try_* accepts a transition
// exactly when the sequential specification allows that response.
struct BasketState {
  std::vector<std::uint64_t> items;  // multiset S, kept sorted
  std::uint32_t count = 0;           // C
  std::uint32_t capacity = 0;        // K

  explicit BasketState(std::uint32_t k = 0) : capacity(k) {}

  // A FULL response is legal in any state; OK requires room.
  bool try_put(std::uint64_t x, bool returned_ok) {
    if (!returned_ok) return true;
    if (count >= capacity) return false;
    auto it = std::lower_bound(items.begin(), items.end(), x);
    items.insert(it, x);
    ++count;
    return true;
  }

  bool try_take_item(std::uint64_t x) {
    auto it = std::lower_bound(items.begin(), items.end(), x);
    if (it == items.end() || *it != x) return false;
    items.erase(it);
    return true;
  }

  bool try_take_closed() {
    if (!items.empty()) return false;
    count = capacity;
    return true;
  }

  bool closed() const { return items.empty() && count == capacity; }

  void encode(std::vector<std::uint64_t>& out) const {
    out.push_back(count);
    out.push_back(items.size());
    for (auto x : items) out.push_back(x);
  }

  bool operator==(const BasketState&) const = default;
};

// Sequential reference object: put never spuriously fails, take returns
// the oldest stored item. Single-threaded use only.
template <class T = Item>
class BasketModel {
 public:
  explicit BasketModel(std::uint32_t capacity) : capacity_(capacity) {}

  PutStatus put(ProcessHandle& h, T x) {
    h.begin_op();
    if (count_ >= capacity_) return PutStatus::Full;
    items_.push_back(std::move(x));
    ++count_;
    return PutStatus::Ok;
  }

  std::optional<T> take(ProcessHandle& h) {
    h.begin_op();
    if (!items_.empty()) {
      T x = std::move(items_.front());
      items_.pop_front();
      return x;
    }
    count_ = capacity_;
    return std::nullopt;
  }

  bool permanently_closed() const { return items_.empty() && count_ == capacity_; }
  std::size_t live_item_count() const { return items_.size(); }
  std::uint32_t capacity() const { return capacity_; }

 private:
  std::uint32_t capacity_;
  std::uint32_t count_ = 0;
  std::deque<T> items_;
};

// --- FAI + SWAP implementation -----------------------------------------

template <class T = Item>
class FaiSwapBasket {
 public:
  explicit FaiSwapBasket(std::uint32_t capacity)
      : capacity_(capacity), tags_(capacity), storage_(capacity) {
    for (auto& t : tags_) t.store(CellTag::Empty);
    put_tickets_.store(0);
    take_tickets_.store(0);
    closed_.store(false);
  }

  PutStatus put(ProcessHandle& h, T x) {
    h.begin_op();
    while (true) {
      h.count_iteration();
      h.count_step();
      bool closed = closed_.load();
      h.count_step();
      std::uint64_t tickets = put_tickets_.load();
      if (closed || tickets >= capacity_) return PutStatus::Full;
      h.count_step();
      std::uint64_t slot = put_tickets_.fetch_add(1);
      if (slot >= capacity_) return PutStatus::Full;
      // Unique putter for this slot; the exchange publishes the payload.
      storage_[slot] = std::move(x);
      h.count_step();
      CellTag displaced = tags_[slot].exchange(CellTag::Stored);
      if (displaced == CellTag::Empty) return PutStatus::Ok;
      // The slot's taker cancelled it first. The stored payload is dead;
      // put the taken mark back so quiescent accounting sees live items
      // only, and move on to the next ticket.
      x = std::move(storage_[slot]);
      h.count_step();
      tags_[slot].store(CellTag::Taken);
    }
  }

  std::optional<T> take(ProcessHandle& h) {
    h.begin_op();
    while (true) {
      h.count_iteration();
      h.count_step();
      bool closed = closed_.load();
      h.count_step();
      std::uint64_t tickets = take_tickets_.load();
      if (closed || tickets >= capacity_) return std::nullopt;
      h.count_step();
      std::uint64_t slot = take_tickets_.fetch_add(1);
      if (slot >= capacity_) {
        h.count_step();
        closed_.store(true);
        return std::nullopt;
      }
      h.count_step();
      CellTag displaced = tags_[slot].exchange(CellTag::Taken);
      if (displaced == CellTag::Stored) return std::move(storage_[slot]);
      // displaced == Empty: cancelled a slot whose put never arrived.
    }
  }

  std::uint32_t capacity() const { return capacity_; }

  // Quiescent introspection.
  bool permanently_closed() const {
    return closed_.load() || take_tickets_.load() >= capacity_;
  }
  std::size_t live_item_count() const {
    std::size_t n = 0;
    for (auto& t : tags_) n += (t.load() == CellTag::Stored);
    return n;
  }

 private:
  std::uint32_t capacity_;
  std::vector<std::atomic<CellTag>> tags_;
  std::vector<T> storage_;
  alignas(kCacheLineBytes) std::atomic<std::uint64_t> put_tickets_;
  alignas(kCacheLineBytes) std::atomic<std::uint64_t> take_tickets_;
  alignas(kCacheLineBytes) std::atomic<bool> closed_;
};

// --- per-process-slot CAS implementation --------------------------------

template <class T = Item>
class CasBasket {
 public:
  explicit CasBasket(std::uint32_t nprocs)
      : nprocs_(nprocs), tags_(nprocs), storage_(nprocs) {
    for (auto& t : tags_) t.store(CellTag::Empty);
    closed_.store(false);
  }

  PutStatus put(ProcessHandle& h, T x) {
    check(h);
    h.begin_op();
    h.count_step();
    if (closed_.load()) return PutStatus::Full;
    std::uint32_t slot = h.pid();
    h.count_step();
    CellTag tag = tags_[slot].load();
    if (tag == CellTag::Empty) {
      storage_[slot] = std::move(x);
      h.count_step();
      if (tags_[slot].compare_exchange_strong(tag, CellTag::Stored)) {
        return PutStatus::Ok;
      }
    }
    return PutStatus::Full;
  }

  std::optional<T> take(ProcessHandle& h) {
    check(h);
    h.begin_op();
    TakeSlots& slots = h.take_slots(this, nprocs_);
    while (true) {
      h.count_iteration();
      h.count_step();
      if (closed_.load()) return std::nullopt;
      std::uint32_t pos = pick_slot(h, slots);
      if (slots.exhausted()) {
        h.count_step();
        closed_.store(true);
      }
      Compete first = compete(h, pos);
      if (first.item) return std::move(first.item);
      if (first.outcome == CellTag::Empty) {
        // Lost a race or cancelled; the cell changes at most twice, so one
        // more look settles it.
        Compete second = compete(h, pos);
        if (second.item) return std::move(second.item);
      }
    }
  }

  std::uint32_t capacity() const { return nprocs_; }

  bool permanently_closed() const { return closed_.load(); }
  std::size_t live_item_count() const {
    std::size_t n = 0;
    for (auto& t : tags_) n += (t.load() == CellTag::Stored);
    return n;
  }

 private:
  struct Compete {
    std::optional<T> item;   // engaged iff an item was won
    CellTag outcome = CellTag::Taken;  // Empty = indecisive, Taken = cell dead
  };

  void check(const ProcessHandle& h) const {
    if (h.pid() >= nprocs_) throw UsageError("handle not registered with this basket");
  }

  // Own slot first, then a random untried one. The chosen slot is removed
  // from the handle's per-basket set.
  std::uint32_t pick_slot(ProcessHandle& h, TakeSlots& slots) {
    if (slots.own_available) {
      slots.own_available = false;
      return h.pid();
    }
    // Unreachable with an exhausted set: the process that empties it writes
    // the closed flag, which the state read at the top of the loop sees.
    if (slots.others.empty()) throw UsageError("pick from exhausted slot set");
    std::size_t i = static_cast<std::size_t>(h.rng().below(slots.others.size()));
    std::uint32_t pos = slots.others[i];
    slots.others[i] = slots.others.back();
    slots.others.pop_back();
    return pos;
  }

  Compete compete(ProcessHandle& h, std::uint32_t pos) {
    h.count_step();
    CellTag tag = tags_[pos].load();
    if (tag == CellTag::Taken) return {std::nullopt, CellTag::Taken};
    h.count_step();
    if (tags_[pos].compare_exchange_strong(tag, CellTag::Taken)) {
      if (tag == CellTag::Stored) return {std::move(storage_[pos]), CellTag::Stored};
      return {std::nullopt, CellTag::Empty};  // cancelled an empty cell
    }
    return {std::nullopt, CellTag::Empty};  // CAS lost
  }

  std::uint32_t nprocs_;
  std::vector<std::atomic<CellTag>> tags_;
  std::vector<T> storage_;
  alignas(kCacheLineBytes) std::atomic<bool> closed_;
};

}  // namespace mbq
