#pragma once

// Process registration model. Every concurrent object in this library is
// created for a fixed number of processes n; callers act through a
// ProcessHandle with an id in 0..n-1. The handle owns all persistent
// per-process locals the algorithms need (the link value recorded by a
// load-link, the per-basket set of not-yet-tried slots, the PRNG) plus
// step instrumentation used by the wait-freedom tests.
//
// A handle is confined to one thread at a time; it may migrate between
// threads at operation boundaries.

#include <cstdint>
#include <deque>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mbq/common.hpp"

namespace mbq {

// Link state a process keeps per LL/IC object.
struct LlicLocal {
  std::uint64_t value = 0;   // result of the last load-link
  std::uint32_t max_index = 0;  // smallest index attaining it (array impls)
  bool linked = false;       // has this process load-linked at least once
};

// Per-basket slot set a process keeps for the CAS basket's take.
struct TakeSlots {
  bool own_available = true;       // own slot not yet tried
  std::vector<std::uint32_t> others;  // remaining foreign slots
  bool exhausted() const { return !own_available && others.empty(); }
};

class ProcessHandle {
 public:
  ProcessHandle(std::uint32_t pid, std::uint64_t seed) : pid_(pid), rng_(seed) {}

  ProcessHandle(const ProcessHandle&) = delete;
  ProcessHandle& operator=(const ProcessHandle&) = delete;

  std::uint32_t pid() const { return pid_; }
  SplitMix64& rng() { return rng_; }

  // Shared-memory instructions executed by the most recent operation and
  // loop iterations it took; the property tests assert the static bounds.
  std::uint64_t last_op_steps() const { return steps_; }
  std::uint64_t last_op_iterations() const { return iterations_; }

  void begin_op() {
    steps_ = 0;
    iterations_ = 0;
  }
  void count_step() { ++steps_; }
  void count_iteration() { ++iterations_; }

  // Locals for an LL/IC object. A handle typically touches very few of
  // these (a queue has two), so a flat scan beats a hash map here.
  LlicLocal& llic_local(const void* object) {
    for (auto& [key, local] : llic_locals_) {
      if (key == object) return local;
    }
    llic_locals_.emplace_back(object, LlicLocal{});
    return llic_locals_.back().second;
  }

  // Take-slot state for a CAS basket, created on first contact.
  TakeSlots& take_slots(const void* basket, std::uint32_t nprocs) {
    auto it = take_slots_.find(basket);
    if (it == take_slots_.end()) {
      TakeSlots slots;
      slots.others.reserve(nprocs - 1);
      for (std::uint32_t i = 0; i < nprocs; ++i) {
        if (i != pid_) slots.others.push_back(i);
      }
      it = take_slots_.emplace(basket, std::move(slots)).first;
    }
    return it->second;
  }

 private:
  std::uint32_t pid_;
  SplitMix64 rng_;
  std::uint64_t steps_ = 0;
  std::uint64_t iterations_ = 0;
  std::vector<std::pair<const void*, LlicLocal>> llic_locals_;
  std::unordered_map<const void*, TakeSlots> take_slots_;
};

// Issues the n handles with ids 0..n-1. Per-handle PRNG streams are
// derived deterministically from the master seed.
class ProcessSet {
 public:
  explicit ProcessSet(std::uint32_t nprocs, std::uint64_t seed = 0) {
    for (std::uint32_t p = 0; p < nprocs; ++p) {
      handles_.emplace_back(p, mix_seed(seed, p));
    }
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(handles_.size()); }
  ProcessHandle& operator[](std::uint32_t p) { return handles_.at(p); }

 private:
  std::deque<ProcessHandle> handles_;  // stable addresses
};

}  // namespace mbq
