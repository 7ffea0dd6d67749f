#pragma once

// Load-link/increment-conditional (LL/IC) objects.
//
// An LL/IC object holds a non-negative counter R. load_link returns the
// current value and links the caller to it; increment_conditional bumps R
// by one only if R has not been incremented since the caller's last
// load_link, and succeeds (returns) either way. Three wait-free
// implementations are provided:
//
//   CasLlic   - one shared register, conditional CAS.
//   RwLlic    - one single-writer cell per process, plain reads/writes;
//               the abstract value is the array maximum.
//   MixedLlic - a CAS-modified array of K cells (K may be much smaller
//               than the process count); increments land on a randomly
//               chosen cell first, spreading contention.
//
// LlicModel is the sequential reference: the other implementations are
// tested against it both directly (sequential differential runs) and via
// the brute-force linearization oracle in linearize.hpp.
//
// FaiCounter is not an LL/IC object; it is the fetch-and-increment
// baseline the benchmark harness compares against.
//
// All shared-memory accesses use sequentially consistent ordering.

#include <atomic>
#include <cstdint>
#include <vector>

#include "mbq/common.hpp"
#include "mbq/process.hpp"

namespace mbq {

// Array of atomic 64-bit cells with optional cache-line spacing between
// logical cells. stride is in units of cells.
class AtomicCellArray {
 public:
  AtomicCellArray(std::size_t count, bool padded)
      : stride_(padded ? kCacheLineBytes / sizeof(std::atomic<std::uint64_t>) : 1),
        cells_(count * stride_) {
    for (auto& c : cells_) c.store(0);
  }

  std::atomic<std::uint64_t>& operator[](std::size_t i) { return cells_[i * stride_]; }
  const std::atomic<std::uint64_t>& operator[](std::size_t i) const {
    return cells_[i * stride_];
  }

 private:
  std::size_t stride_;
  std::vector<std::atomic<std::uint64_t>> cells_;
};

// --- Sequential reference model ---------------------------------------

// Abstract LL/IC state: the counter plus each process's recorded link.
// try_* return false when the claimed result/transition is not allowed,
// which is what the linearization oracle branches on.
struct LlicState {
  std::uint64_t value = 0;
  std::vector<std::int64_t> linked;  // -1 until the process load-links

  explicit LlicState(std::uint32_t nprocs = 0) : linked(nprocs, -1) {}

  bool try_load_link(std::uint32_t p, std::uint64_t returned) {
    if (returned != value) return false;
    linked.at(p) = static_cast<std::int64_t>(value);
    return true;
  }

  // "If R has not been incremented since the last LL of the invoking
  // process, then R = R + 1." The link is consumed only by an intervening
  // increment, so value == linked[p] is exactly that condition.
  bool try_increment_conditional(std::uint32_t p) {
    if (linked.at(p) < 0) return false;  // IC before any LL
    if (static_cast<std::int64_t>(value) == linked[p]) ++value;
    return true;
  }

  void encode(std::vector<std::uint64_t>& out) const {
    out.push_back(value);
    for (auto l : linked) out.push_back(static_cast<std::uint64_t>(l + 1));
  }

  bool operator==(const LlicState&) const = default;
};

// Sequential reference object. Not safe for concurrent use; it exists to
// drive differential tests and model-backed queue compositions.
class LlicModel {
 public:
  explicit LlicModel(std::uint32_t nprocs) : nprocs_(nprocs), state_(nprocs) {}

  std::uint64_t load_link(ProcessHandle& h) {
    check(h);
    h.begin_op();
    std::uint64_t v = state_.value;
    state_.try_load_link(h.pid(), v);
    return v;
  }

  void increment_conditional(ProcessHandle& h) {
    check(h);
    h.begin_op();
    if (state_.linked.at(h.pid()) < 0) {
      throw UsageError("increment_conditional before any load_link");
    }
    state_.try_increment_conditional(h.pid());
  }

  std::uint64_t snapshot_value() const { return state_.value; }
  const LlicState& state() const { return state_; }

 private:
  void check(const ProcessHandle& h) const {
    if (h.pid() >= nprocs_) throw UsageError("handle not registered with this object");
  }

  std::uint32_t nprocs_;
  LlicState state_;
};

// --- CAS-based implementation ------------------------------------------

class CasLlic {
 public:
  explicit CasLlic(std::uint32_t nprocs) : nprocs_(nprocs) { value_.store(0); }

  std::uint64_t load_link(ProcessHandle& h) {
    check(h);
    h.begin_op();
    LlicLocal& local = h.llic_local(this);
    h.count_step();
    local.value = value_.load();
    local.linked = true;
    return local.value;
  }

  void increment_conditional(ProcessHandle& h) {
    check(h);
    h.begin_op();
    LlicLocal& local = h.llic_local(this);
    if (!local.linked) throw UsageError("increment_conditional before any load_link");
    h.count_step();
    std::uint64_t seen = value_.load();
    if (seen == local.value) {
      h.count_step();
      std::uint64_t expected = local.value;
      value_.compare_exchange_strong(expected, local.value + 1);
    }
  }

  std::uint64_t snapshot_value() const { return value_.load(); }

 private:
  void check(const ProcessHandle& h) const {
    if (h.pid() >= nprocs_) throw UsageError("handle not registered with this object");
  }

  std::uint32_t nprocs_;
  alignas(kCacheLineBytes) std::atomic<std::uint64_t> value_;
};

// --- READ/WRITE implementation -----------------------------------------

// cells_[p] is written only by process p and is strictly increasing; the
// abstract counter value is the maximum over the array. Scans are
// index-ascending, one read per cell.
class RwLlic {
 public:
  explicit RwLlic(std::uint32_t nprocs, bool padded = false)
      : nprocs_(nprocs), cells_(nprocs, padded) {}

  std::uint64_t load_link(ProcessHandle& h) {
    check(h);
    h.begin_op();
    LlicLocal& local = h.llic_local(this);
    local.value = scan_max(h);
    local.linked = true;
    return local.value;
  }

  void increment_conditional(ProcessHandle& h) {
    check(h);
    h.begin_op();
    LlicLocal& local = h.llic_local(this);
    if (!local.linked) throw UsageError("increment_conditional before any load_link");
    std::uint64_t max = scan_max(h);
    if (max == local.value) {
      h.count_step();
      cells_[h.pid()].store(local.value + 1);
    }
  }

  std::uint64_t snapshot_value() const {
    std::uint64_t max = 0;
    for (std::uint32_t i = 0; i < nprocs_; ++i) {
      std::uint64_t v = cells_[i].load();
      if (v > max) max = v;
    }
    return max;
  }

 private:
  void check(const ProcessHandle& h) const {
    if (h.pid() >= nprocs_) throw UsageError("handle not registered with this object");
  }

  std::uint64_t scan_max(ProcessHandle& h) {
    std::uint64_t max = 0;
    for (std::uint32_t i = 0; i < nprocs_; ++i) {
      h.count_step();
      std::uint64_t v = cells_[i].load();
      if (v > max) max = v;
    }
    return max;
  }

  std::uint32_t nprocs_;
  AtomicCellArray cells_;
};

// --- Mixed implementation ------------------------------------------------

// K CAS-modified cells shared by all processes. load_link scans for the
// maximum and remembers the smallest index attaining it; the conditional
// increment first tries a CAS on a randomly picked other cell and falls
// back to the remembered maximum cell.
class MixedLlic {
 public:
  explicit MixedLlic(std::uint32_t nprocs, std::uint32_t capacity = 2,
                     bool padded = false)
      : nprocs_(nprocs), capacity_(capacity), cells_(capacity, padded) {
    // With K = 1 the increment has no eligible cell distinct from the
    // maximum's index, so such objects are rejected outright.
    if (capacity < 2) throw UsageError("mixed LL/IC requires capacity >= 2");
  }

  std::uint32_t capacity() const { return capacity_; }

  std::uint64_t load_link(ProcessHandle& h) {
    check(h);
    h.begin_op();
    LlicLocal& local = h.llic_local(this);
    std::uint64_t max = 0;
    std::uint32_t max_index = 0;
    for (std::uint32_t i = 0; i < capacity_; ++i) {
      h.count_step();
      std::uint64_t v = cells_[i].load();
      if (v > max) {
        max = v;
        max_index = i;
      }
    }
    local.value = max;
    local.max_index = max_index;
    local.linked = true;
    return max;
  }

  void increment_conditional(ProcessHandle& h) {
    check(h);
    h.begin_op();
    LlicLocal& local = h.llic_local(this);
    if (!local.linked) throw UsageError("increment_conditional before any load_link");

    std::uint32_t pos = pick_other(h, local.max_index);
    h.count_step();
    std::uint64_t seen = cells_[pos].load();
    if (seen < local.value + 1) {
      h.count_step();
      if (cells_[pos].compare_exchange_strong(seen, local.value + 1)) return;
    }
    h.count_step();
    std::uint64_t at_max = cells_[local.max_index].load();
    if (at_max == local.value) {
      h.count_step();
      cells_[local.max_index].compare_exchange_strong(at_max, local.value + 1);
    }
  }

  std::uint64_t snapshot_value() const {
    std::uint64_t max = 0;
    for (std::uint32_t i = 0; i < capacity_; ++i) {
      std::uint64_t v = cells_[i].load();
      if (v > max) max = v;
    }
    return max;
  }

 private:
  void check(const ProcessHandle& h) const {
    if (h.pid() >= nprocs_) throw UsageError("handle not registered with this object");
  }

  // Uniform over {0..K-1} \ {skip}.
  std::uint32_t pick_other(ProcessHandle& h, std::uint32_t skip) {
    if (capacity_ == 2) return 1 - skip;
    std::uint32_t r = static_cast<std::uint32_t>(h.rng().below(capacity_ - 1));
    return r < skip ? r : r + 1;
  }

  std::uint32_t nprocs_;
  std::uint32_t capacity_;
  AtomicCellArray cells_;
};

// --- FAI baseline ---------------------------------------------------------

class FaiCounter {
 public:
  explicit FaiCounter(std::uint32_t nprocs) : nprocs_(nprocs) { value_.store(0); }

  std::uint64_t fetch_increment(ProcessHandle& h) {
    if (h.pid() >= nprocs_) throw UsageError("handle not registered with this object");
    h.begin_op();
    h.count_step();
    return value_.fetch_add(1);
  }

  std::uint64_t snapshot_value() const { return value_.load(); }

 private:
  std::uint32_t nprocs_;
  alignas(kCacheLineBytes) std::atomic<std::uint64_t> value_;
};

}  // namespace mbq
