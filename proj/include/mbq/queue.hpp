#pragma once

// The modular baskets queue: an infinite array of baskets indexed by two
// LL/IC counters. Enqueuers put into the basket at the tail and bump the
// tail; dequeuers take from the basket at the head, bumping the head past
// baskets that have closed. Both operations are lock-free when the
// underlying objects are wait-free and linearizable.
//
// The infinite array is a linked list of fixed-size segments, appended
// with CAS on demand and never reclaimed.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "mbq/basket.hpp"
#include "mbq/common.hpp"
#include "mbq/process.hpp"

namespace mbq {

template <class Basket>
class SegmentedBasketArray {
 public:
  using Factory = std::function<std::unique_ptr<Basket>()>;

  SegmentedBasketArray(std::size_t segment_size, Factory factory)
      : segment_size_(segment_size), factory_(std::move(factory)) {
    first_ = new Segment(0, segment_size_, factory_);
    hint_.store(first_);
  }

  ~SegmentedBasketArray() {
    Segment* s = first_;
    while (s != nullptr) {
      Segment* next = s->next.load();
      delete s;
      s = next;
    }
  }

  SegmentedBasketArray(const SegmentedBasketArray&) = delete;
  SegmentedBasketArray& operator=(const SegmentedBasketArray&) = delete;

  // Index i lives in segment i / segment_size at offset i % segment_size,
  // stable forever once the segment exists.
  Basket& at(std::uint64_t index) {
    std::uint64_t seg_index = index / segment_size_;
    Segment* s = hint_.load();
    if (s->base > seg_index) s = first_;
    while (s->base < seg_index) {
      Segment* next = s->next.load();
      if (next == nullptr) {
        // Grow by one segment; exactly one of the racing appenders wins
        // and the loser retires its allocation.
        Segment* fresh = new Segment(s->base + 1, segment_size_, factory_);
        if (!s->next.compare_exchange_strong(next, fresh)) {
          delete fresh;
        }
        next = s->next.load();
      }
      s = next;
    }
    hint_.store(s);
    return *s->baskets[index % segment_size_];
  }

  std::size_t segment_size() const { return segment_size_; }

  std::size_t segment_count() const {
    std::size_t n = 0;
    for (Segment* s = first_; s != nullptr; s = s->next.load()) ++n;
    return n;
  }

  // Visits every basket created so far, in index order.
  template <class Fn>
  void for_each_basket(Fn&& fn) const {
    for (Segment* s = first_; s != nullptr; s = s->next.load()) {
      for (std::size_t i = 0; i < s->baskets.size(); ++i) {
        fn(s->base * segment_size_ + i, *s->baskets[i]);
      }
    }
  }

 private:
  struct Segment {
    Segment(std::uint64_t base_index, std::size_t count, const Factory& factory)
        : base(base_index) {
      baskets.reserve(count);
      for (std::size_t i = 0; i < count; ++i) baskets.push_back(factory());
    }

    std::uint64_t base;  // segment index, not item index
    std::vector<std::unique_ptr<Basket>> baskets;
    std::atomic<Segment*> next{nullptr};
  };

  std::size_t segment_size_;
  Factory factory_;
  Segment* first_;
  std::atomic<Segment*> hint_;  // last accessed segment, a walk shortcut
};

template <class Llic, class Basket>
class BasketsQueue {
 public:
  using LlicFactory = std::function<std::unique_ptr<Llic>()>;
  using BasketFactory = std::function<std::unique_ptr<Basket>()>;

  BasketsQueue(std::uint32_t nprocs, LlicFactory llic_factory,
               BasketFactory basket_factory, std::size_t segment_size = 1024)
      : nprocs_(nprocs),
        baskets_(segment_size, std::move(basket_factory)),
        head_(llic_factory()),
        tail_(llic_factory()) {}

  // Loops until some basket accepts the item; returns the index of the
  // basket that did.
  std::uint64_t enqueue(ProcessHandle& h, Item x) {
    check(h);
    while (true) {
      std::uint64_t tail = tail_->load_link(h);
      if (baskets_.at(tail).put(h, x) == PutStatus::Ok) {
        tail_->increment_conditional(h);
        return tail;
      }
      tail_->increment_conditional(h);
    }
  }

  // Empty result means the queue was logically empty at some instant
  // during the call.
  std::optional<Item> dequeue(ProcessHandle& h) {
    check(h);
    std::uint64_t head = head_->load_link(h);
    std::uint64_t tail = tail_->load_link(h);
    while (true) {
      if (head < tail) {
        std::optional<Item> x = baskets_.at(head).take(h);
        if (x) return x;
        head_->increment_conditional(h);
      }
      std::uint64_t fresh_head = head_->load_link(h);
      std::uint64_t fresh_tail = tail_->load_link(h);
      if (head == fresh_head && fresh_head == fresh_tail && fresh_tail == tail) {
        return std::nullopt;
      }
      head = fresh_head;
      tail = fresh_tail;
    }
  }

  std::uint32_t nprocs() const { return nprocs_; }

  // Quiescent introspection for the harnesses.
  std::uint64_t head_value() const { return head_->snapshot_value(); }
  std::uint64_t tail_value() const { return tail_->snapshot_value(); }
  std::size_t segment_count() const { return baskets_.segment_count(); }
  Basket& basket_at(std::uint64_t index) { return baskets_.at(index); }

  std::size_t quiescent_live_items() const {
    std::size_t n = 0;
    baskets_.for_each_basket([&](std::uint64_t, const Basket& b) {
      n += b.live_item_count();
    });
    return n;
  }

  template <class Fn>
  void for_each_basket(Fn&& fn) const {
    baskets_.for_each_basket(std::forward<Fn>(fn));
  }

 private:
  void check(const ProcessHandle& h) const {
    if (h.pid() >= nprocs_) throw UsageError("handle not registered with this queue");
  }

  std::uint32_t nprocs_;
  SegmentedBasketArray<Basket> baskets_;
  std::unique_ptr<Llic> head_;
  std::unique_ptr<Llic> tail_;
};

}  // namespace mbq
