#pragma once

// Exhaustive interleaving exploration for small instances.
//
// Each algorithm is mirrored by a step machine executing one shared-memory
// instruction (read, write, CAS, FAI, SWAP) per step; local computation is
// folded into the adjacent shared step since it cannot affect
// interleavings. The explorer runs a fixed program per process and
// enumerates every schedule, emitting an invocation event fused with an
// operation's first step and a response event fused with its last, which
// yields the tightest real-time intervals: a history linearizable under
// them is linearizable under any wider ones.
//
// Two sound reductions keep the search tractable without losing a single
// distinct history:
//
//  - equivalent-prefix merging: a (machine state, event prefix) pair seen
//    before cannot lead to new complete histories;
//  - read canonicalization: adjacent event-free read-only steps of
//    different processes commute, so only ascending process orders of
//    such runs are scheduled.
//
// Nondeterministic choices inside the algorithms (the mixed LL/IC's cell
// pick, the CAS basket's slot pick) are branched over exhaustively.

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <unordered_set>
#include <vector>

#include "mbq/common.hpp"
#include "mbq/history.hpp"

namespace mbq {

struct OpSpec {
  OpKind kind;
  std::uint64_t arg = 0;
};

struct ExploreOptions {
  std::uint64_t node_budget = 40'000'000;
  bool merge_equivalent = true;
  bool canonical_reads = true;
};

struct ExploreStats {
  std::uint64_t nodes = 0;
  std::uint64_t complete_executions = 0;
  std::uint64_t distinct_histories = 0;
  std::uint64_t gap_violations = 0;  // array value v+1 appearing without v
};

namespace detail {

// Open-addressing set of 128-bit keys; (0,0) is the empty slot.
class FlatKeySet {
 public:
  FlatKeySet() : slots_(1 << 16) {}

  bool insert(Key128 k) {
    if (k.a == 0 && k.b == 0) k = {1, 1};
    if ((count_ + 1) * 5 > slots_.size() * 3) grow();
    std::size_t mask = slots_.size() - 1;
    std::size_t i = static_cast<std::size_t>(k.a) & mask;
    while (true) {
      Key128& s = slots_[i];
      if (s.a == 0 && s.b == 0) {
        s = k;
        ++count_;
        return true;
      }
      if (s == k) return false;
      i = (i + 1) & mask;
    }
  }

  std::size_t size() const { return count_; }

 private:
  void grow() {
    std::vector<Key128> old = std::move(slots_);
    slots_.assign(old.size() * 2, Key128{});
    count_ = 0;
    for (const Key128& k : old) {
      if (!(k.a == 0 && k.b == 0)) insert(k);
    }
  }

  std::vector<Key128> slots_;
  std::size_t count_ = 0;
};

}  // namespace detail

// A history event as the explorer emits it; ts is the index in sequence.
struct SimEvent {
  EventKind kind;
  std::uint8_t proc;
  OpKind op;
  ResultKind result = ResultKind::None;  // responses only
  std::uint64_t value = 0;               // inv arg or response payload

  std::uint64_t packed_meta() const {
    return static_cast<std::uint64_t>(kind) | (std::uint64_t(proc) << 8) |
           (std::uint64_t(op) << 16) | (std::uint64_t(result) << 24);
  }
};

template <class Machine>
class Explorer {
 public:
  Explorer(typename Machine::Config config,
           std::vector<std::vector<OpSpec>> programs, ExploreOptions options = {})
      : config_(config), programs_(std::move(programs)), options_(options) {}

  // Enumerates every schedule and returns the distinct complete histories
  // in discovery order, each as a linearize-ready operation list.
  const std::vector<std::vector<OpRecord>>& run() {
    histories_.clear();
    seen_histories_.clear();
    stats_ = {};

    typename Machine::Shared shared = Machine::make_shared(config_);
    std::vector<typename Machine::Proc> procs;
    const std::uint32_t nprocs = static_cast<std::uint32_t>(programs_.size());
    for (std::uint32_t p = 0; p < nprocs; ++p) {
      procs.push_back(Machine::make_proc(config_, p));
    }
    pos_.assign(nprocs, Position{});
    events_.clear();
    visited_ = detail::FlatKeySet{};
    std::uint64_t mask0 = value_mask(shared);
    dfs(shared, procs, -1, mask0);
    stats_.distinct_histories = histories_.size();
    return histories_;
  }

  const ExploreStats& stats() const { return stats_; }

 private:
  struct Position {
    std::uint32_t op_index = 0;
    bool started = false;
  };

  static std::uint64_t value_mask(const typename Machine::Shared& shared) {
    if constexpr (requires { Machine::value_mask(shared); }) {
      return Machine::value_mask(shared);
    } else {
      return 0;
    }
  }

  bool all_done() const {
    for (std::size_t p = 0; p < programs_.size(); ++p) {
      if (pos_[p].op_index < programs_[p].size()) return false;
    }
    return true;
  }

  // The scheduling context (was the previous step an event-free read, and
  // by whom) shapes which children the canonical-read rule allows, so it
  // is part of the key: merging across contexts could drop schedules
  // whose histories were never covered elsewhere.
  detail::Key128 state_key(const typename Machine::Shared& shared,
                           const std::vector<typename Machine::Proc>& procs,
                           int prev_read_proc) {
    buf_.clear();
    buf_.push_back(static_cast<std::uint64_t>(prev_read_proc + 1));
    shared.encode(buf_);
    for (std::size_t p = 0; p < procs.size(); ++p) {
      procs[p].encode(buf_);
      buf_.push_back(pos_[p].op_index * 2 + (pos_[p].started ? 1 : 0));
    }
    for (const SimEvent& e : events_) {
      buf_.push_back(e.packed_meta());
      buf_.push_back(e.value);
    }
    return detail::mix_words(buf_);
  }

  void record_history() {
    ++stats_.complete_executions;
    std::string key;
    key.resize(events_.size() * 16);
    for (std::size_t i = 0; i < events_.size(); ++i) {
      std::uint64_t meta = events_[i].packed_meta();
      std::uint64_t value = events_[i].value;
      std::memcpy(key.data() + i * 16, &meta, 8);
      std::memcpy(key.data() + i * 16 + 8, &value, 8);
    }
    if (!seen_histories_.insert(std::move(key)).second) return;

    std::vector<OpRecord> ops;
    std::vector<std::size_t> open(programs_.size(), 0);
    std::vector<std::vector<std::size_t>> index(programs_.size());
    for (std::size_t ts = 0; ts < events_.size(); ++ts) {
      const SimEvent& e = events_[ts];
      if (e.kind == EventKind::Invocation) {
        OpRecord op;
        op.op_id = e.proc * 64 + index[e.proc].size();
        op.process = e.proc;
        op.kind = e.op;
        if (e.op == OpKind::Put || e.op == OpKind::Enq) {
          op.arg = e.value;
          op.has_arg = true;
        }
        op.inv_ts = ts;
        index[e.proc].push_back(ops.size());
        ops.push_back(op);
      } else {
        OpRecord& op = ops[index[e.proc][open[e.proc]++]];
        op.resp_ts = ts;
        op.result = e.result;
        op.result_value = e.value;
      }
    }
    histories_.push_back(std::move(ops));
  }

  // prev_read_proc: process id of the previous step when that step was an
  // event-free read-only one, else -1.
  void dfs(const typename Machine::Shared& shared,
           const std::vector<typename Machine::Proc>& procs, int prev_read_proc,
           std::uint64_t seen_values) {
    if (++stats_.nodes > options_.node_budget) {
      throw BudgetError("exploration exceeded node budget of " +
                        std::to_string(options_.node_budget));
    }
    if (all_done()) {
      record_history();
      return;
    }
    if (options_.merge_equivalent &&
        !visited_.insert(state_key(shared, procs, prev_read_proc))) {
      return;
    }

    const std::uint32_t nprocs = static_cast<std::uint32_t>(programs_.size());
    for (std::uint32_t p = 0; p < nprocs; ++p) {
      Position& pos = pos_[p];
      if (pos.op_index >= programs_[p].size()) continue;
      const OpSpec& spec = programs_[p][pos.op_index];

      typename Machine::Proc staged = procs[p];
      bool starting = !pos.started;
      if (starting) Machine::begin(staged, spec);
      std::uint32_t nchoices = Machine::choices(shared, staged);

      for (std::uint32_t choice = 0; choice < nchoices; ++choice) {
        typename Machine::Shared next_shared = shared;
        std::vector<typename Machine::Proc> next_procs = procs;
        next_procs[p] = staged;
        auto result = Machine::step(next_shared, next_procs[p], choice);

        bool emitted = starting || result.done;
        bool pure_read = !result.wrote && !emitted;
        if (options_.canonical_reads && pure_read && prev_read_proc >= 0 &&
            static_cast<int>(p) < prev_read_proc) {
          continue;  // the ascending-order twin covers this schedule
        }

        std::uint64_t next_seen = seen_values;
        if constexpr (requires { Machine::value_mask(next_shared); }) {
          std::uint64_t mask = Machine::value_mask(next_shared);
          std::uint64_t fresh = mask & ~seen_values;
          while (fresh != 0) {
            int v = std::countr_zero(fresh);
            fresh &= fresh - 1;
            if (v > 0 && ((seen_values >> (v - 1)) & 1) == 0) ++stats_.gap_violations;
          }
          next_seen |= mask;
        }

        std::size_t event_base = events_.size();
        if (starting) {
          events_.push_back(SimEvent{EventKind::Invocation, static_cast<std::uint8_t>(p),
                                     spec.kind, ResultKind::None, spec.arg});
        }
        Position saved = pos;
        pos.started = true;
        if (result.done) {
          events_.push_back(SimEvent{EventKind::Response, static_cast<std::uint8_t>(p),
                                     spec.kind, result.result, result.value});
          pos.started = false;
          ++pos.op_index;
        }

        dfs(next_shared, next_procs, pure_read ? static_cast<int>(p) : -1, next_seen);

        pos = saved;
        events_.resize(event_base);
      }
    }
  }

  typename Machine::Config config_;
  std::vector<std::vector<OpSpec>> programs_;
  ExploreOptions options_;

  std::vector<Position> pos_;
  std::vector<SimEvent> events_;
  std::vector<std::uint64_t> buf_;
  detail::FlatKeySet visited_;
  std::unordered_set<std::string> seen_histories_;
  std::vector<std::vector<OpRecord>> histories_;
  ExploreStats stats_;
};

// --- step machines ----------------------------------------------------------

namespace sim {

struct StepResult {
  bool done = false;
  ResultKind result = ResultKind::None;
  std::uint64_t value = 0;
  bool wrote = false;
};

// - fetch-and-increment counter (one step per operation) -

struct FaiSim {
  struct Config {
    std::uint32_t nprocs = 2;
  };
  struct Shared {
    std::uint64_t value = 0;
    void encode(std::vector<std::uint64_t>& out) const { out.push_back(value); }
  };
  struct Proc {
    std::uint32_t pid = 0;
    std::uint8_t pc = 0;
    void encode(std::vector<std::uint64_t>& out) const { out.push_back(pc); }
  };

  static Shared make_shared(const Config&) { return {}; }
  static Proc make_proc(const Config&, std::uint32_t pid) { return {pid, 0}; }
  static void begin(Proc& proc, const OpSpec& spec) {
    if (spec.kind != OpKind::Fai) throw UsageError("fai machine runs fai ops only");
    proc.pc = 1;
  }
  static std::uint32_t choices(const Shared&, const Proc&) { return 1; }
  static StepResult step(Shared& shared, Proc& proc, std::uint32_t) {
    proc.pc = 0;
    return {true, ResultKind::Value, shared.value++, true};
  }
};

// - CAS-based LL/IC -

struct CasLlicSim {
  struct Config {
    std::uint32_t nprocs = 2;
  };
  struct Shared {
    std::uint64_t value = 0;
    void encode(std::vector<std::uint64_t>& out) const { out.push_back(value); }
  };
  struct Proc {
    std::uint32_t pid = 0;
    std::uint64_t link = 0;
    bool linked = false;
    std::uint8_t pc = 0;  // 0 idle, 1 ll read, 2 ic read, 3 ic cas
    void encode(std::vector<std::uint64_t>& out) const {
      out.push_back(link * 2 + (linked ? 1 : 0));
      out.push_back(pc);
    }
  };

  static Shared make_shared(const Config&) { return {}; }
  static Proc make_proc(const Config&, std::uint32_t pid) {
    Proc p;
    p.pid = pid;
    return p;
  }
  static void begin(Proc& proc, const OpSpec& spec) {
    if (spec.kind == OpKind::Ll) {
      proc.pc = 1;
    } else if (spec.kind == OpKind::Ic) {
      if (!proc.linked) throw UsageError("ic before ll in program");
      proc.pc = 2;
    } else {
      throw UsageError("ll/ic machine runs ll/ic ops only");
    }
  }
  static std::uint32_t choices(const Shared&, const Proc&) { return 1; }
  static StepResult step(Shared& shared, Proc& proc, std::uint32_t) {
    switch (proc.pc) {
      case 1:
        proc.link = shared.value;
        proc.linked = true;
        proc.pc = 0;
        return {true, ResultKind::Value, proc.link, false};
      case 2:
        if (shared.value != proc.link) {
          proc.pc = 0;
          return {true, ResultKind::Ok, 0, false};
        }
        proc.pc = 3;
        return {false, ResultKind::None, 0, false};
      default:  // 3: CAS(value, link, link+1)
        if (shared.value == proc.link) shared.value = proc.link + 1;
        proc.pc = 0;
        return {true, ResultKind::Ok, 0, true};
    }
  }
};

// - READ/WRITE LL/IC -

struct RwLlicSim {
  struct Config {
    std::uint32_t nprocs = 2;
  };
  struct Shared {
    std::vector<std::uint64_t> cells;
    void encode(std::vector<std::uint64_t>& out) const {
      for (auto v : cells) out.push_back(v);
    }
  };
  struct Proc {
    std::uint32_t pid = 0;
    std::uint64_t link = 0;
    bool linked = false;
    std::uint8_t pc = 0;  // 0 idle, 1 ll scan, 2 ic scan, 3 ic write
    std::uint32_t index = 0;
    std::uint64_t scan_max = 0;
    void encode(std::vector<std::uint64_t>& out) const {
      out.push_back(link * 2 + (linked ? 1 : 0));
      out.push_back(pc | (std::uint64_t(index) << 8));
      out.push_back(scan_max);
    }
  };

  static Shared make_shared(const Config& cfg) {
    return {std::vector<std::uint64_t>(cfg.nprocs, 0)};
  }
  static Proc make_proc(const Config&, std::uint32_t pid) {
    Proc p;
    p.pid = pid;
    return p;
  }
  static void begin(Proc& proc, const OpSpec& spec) {
    if (spec.kind == OpKind::Ll) {
      proc.pc = 1;
    } else if (spec.kind == OpKind::Ic) {
      if (!proc.linked) throw UsageError("ic before ll in program");
      proc.pc = 2;
    } else {
      throw UsageError("ll/ic machine runs ll/ic ops only");
    }
    proc.index = 0;
    proc.scan_max = 0;
  }
  static std::uint32_t choices(const Shared&, const Proc&) { return 1; }
  static StepResult step(Shared& shared, Proc& proc, std::uint32_t) {
    const std::uint32_t n = static_cast<std::uint32_t>(shared.cells.size());
    switch (proc.pc) {
      case 1: {
        std::uint64_t v = shared.cells[proc.index];
        if (v > proc.scan_max) proc.scan_max = v;
        if (++proc.index < n) return {false, ResultKind::None, 0, false};
        proc.link = proc.scan_max;
        proc.linked = true;
        proc.pc = 0;
        return {true, ResultKind::Value, proc.link, false};
      }
      case 2: {
        std::uint64_t v = shared.cells[proc.index];
        if (v > proc.scan_max) proc.scan_max = v;
        if (++proc.index < n) return {false, ResultKind::None, 0, false};
        if (proc.scan_max == proc.link) {
          proc.pc = 3;
          return {false, ResultKind::None, 0, false};
        }
        proc.pc = 0;
        return {true, ResultKind::Ok, 0, false};
      }
      default:  // 3: write own cell
        shared.cells[proc.pid] = proc.link + 1;
        proc.pc = 0;
        return {true, ResultKind::Ok, 0, true};
    }
  }
  static std::uint64_t value_mask(const Shared& shared) {
    std::uint64_t mask = 0;
    for (auto v : shared.cells) mask |= 1ull << (v & 63);
    return mask;
  }
};

// - mixed LL/IC -

struct MixedLlicSim {
  struct Config {
    std::uint32_t nprocs = 3;
    std::uint32_t capacity = 2;
  };
  struct Shared {
    std::vector<std::uint64_t> cells;
    void encode(std::vector<std::uint64_t>& out) const {
      for (auto v : cells) out.push_back(v);
    }
  };
  struct Proc {
    std::uint32_t pid = 0;
    std::uint64_t link = 0;
    std::uint32_t link_index = 0;
    bool linked = false;
    std::uint8_t pc = 0;  // 1 ll scan, 2 ic pick+read, 3 ic cas, 4 ic read max, 5 ic cas max
    std::uint32_t index = 0;
    std::uint64_t scan_max = 0;
    std::uint32_t scan_index = 0;
    std::uint32_t pos = 0;
    std::uint64_t seen = 0;
    void encode(std::vector<std::uint64_t>& out) const {
      out.push_back(link * 4 + link_index * 2 + (linked ? 1 : 0));
      out.push_back(pc | (std::uint64_t(index) << 8) | (std::uint64_t(pos) << 24) |
                    (std::uint64_t(scan_index) << 40));
      out.push_back(scan_max);
      out.push_back(seen);
    }
  };

  static Shared make_shared(const Config& cfg) {
    if (cfg.capacity < 2) throw UsageError("mixed LL/IC requires capacity >= 2");
    return {std::vector<std::uint64_t>(cfg.capacity, 0)};
  }
  static Proc make_proc(const Config&, std::uint32_t pid) {
    Proc p;
    p.pid = pid;
    return p;
  }
  static void begin(Proc& proc, const OpSpec& spec) {
    if (spec.kind == OpKind::Ll) {
      proc.pc = 1;
    } else if (spec.kind == OpKind::Ic) {
      if (!proc.linked) throw UsageError("ic before ll in program");
      proc.pc = 2;
    } else {
      throw UsageError("ll/ic machine runs ll/ic ops only");
    }
    proc.index = 0;
    proc.scan_max = 0;
    proc.scan_index = 0;
  }
  static std::uint32_t choices(const Shared& shared, const Proc& proc) {
    if (proc.pc == 2) {
      return static_cast<std::uint32_t>(shared.cells.size()) - 1;
    }
    return 1;
  }
  static StepResult step(Shared& shared, Proc& proc, std::uint32_t choice) {
    const std::uint32_t k = static_cast<std::uint32_t>(shared.cells.size());
    switch (proc.pc) {
      case 1: {
        std::uint64_t v = shared.cells[proc.index];
        if (v > proc.scan_max) {
          proc.scan_max = v;
          proc.scan_index = proc.index;
        }
        if (++proc.index < k) return {false, ResultKind::None, 0, false};
        proc.link = proc.scan_max;
        proc.link_index = proc.scan_index;
        proc.linked = true;
        proc.pc = 0;
        return {true, ResultKind::Value, proc.link, false};
      }
      case 2: {
        // pick the choice-th cell other than the linked maximum's index
        proc.pos = choice < proc.link_index ? choice : choice + 1;
        proc.seen = shared.cells[proc.pos];
        proc.pc = proc.seen < proc.link + 1 ? 3 : 4;
        return {false, ResultKind::None, 0, false};
      }
      case 3: {
        bool won = shared.cells[proc.pos] == proc.seen;
        if (won) {
          shared.cells[proc.pos] = proc.link + 1;
          proc.pc = 0;
          return {true, ResultKind::Ok, 0, true};
        }
        proc.pc = 4;
        return {false, ResultKind::None, 0, true};
      }
      case 4: {
        proc.seen = shared.cells[proc.link_index];
        if (proc.seen == proc.link) {
          proc.pc = 5;
          return {false, ResultKind::None, 0, false};
        }
        proc.pc = 0;
        return {true, ResultKind::Ok, 0, false};
      }
      default: {  // 5: CAS(cells[link_index], link, link+1)
        if (shared.cells[proc.link_index] == proc.link) {
          shared.cells[proc.link_index] = proc.link + 1;
        }
        proc.pc = 0;
        return {true, ResultKind::Ok, 0, true};
      }
    }
  }
  static std::uint64_t value_mask(const Shared& shared) {
    std::uint64_t mask = 0;
    for (auto v : shared.cells) mask |= 1ull << (v & 63);
    return mask;
  }
};

// - basket cells (shared by both basket machines) -

struct SimCell {
  std::uint8_t tag = 0;  // 0 empty, 1 stored, 2 taken
  std::uint64_t value = 0;
};

// - K-basket from FAI and SWAP -

struct FaiSwapBasketSim {
  struct Config {
    std::uint32_t nprocs = 2;
    std::uint32_t capacity = 2;
  };
  struct Shared {
    std::uint8_t closed = 0;
    std::uint64_t puts = 0;
    std::uint64_t takes = 0;
    std::vector<SimCell> cells;
    void encode(std::vector<std::uint64_t>& out) const {
      out.push_back(closed | (puts << 8) | (takes << 32));
      for (const auto& c : cells) {
        out.push_back(c.tag);
        out.push_back(c.value);
      }
    }
  };
  struct Proc {
    std::uint32_t pid = 0;
    std::uint8_t pc = 0;
    std::uint64_t arg = 0;
    std::uint64_t ticket = 0;
    std::uint8_t seen_closed = 0;
    void encode(std::vector<std::uint64_t>& out) const {
      out.push_back(pc | (std::uint64_t(seen_closed) << 8) | (ticket << 16));
      out.push_back(arg);
    }
  };

  // put: 1 read state, 2 read tickets, 3 fai, 4 swap in, 5 restore taken
  // take: 6 read state, 7 read tickets, 8 fai, 9 write closed, 10 swap out
  static Shared make_shared(const Config& cfg) {
    Shared s;
    s.cells.resize(cfg.capacity);
    return s;
  }
  static Proc make_proc(const Config&, std::uint32_t pid) {
    Proc p;
    p.pid = pid;
    return p;
  }
  static void begin(Proc& proc, const OpSpec& spec) {
    if (spec.kind == OpKind::Put) {
      proc.pc = 1;
      proc.arg = spec.arg;
    } else if (spec.kind == OpKind::Take) {
      proc.pc = 6;
    } else {
      throw UsageError("basket machine runs put/take ops only");
    }
  }
  static std::uint32_t choices(const Shared&, const Proc&) { return 1; }
  static StepResult step(Shared& shared, Proc& proc, std::uint32_t) {
    const std::uint64_t k = shared.cells.size();
    switch (proc.pc) {
      case 1:
        proc.seen_closed = shared.closed;
        proc.pc = 2;
        return {false, ResultKind::None, 0, false};
      case 2:
        if (proc.seen_closed || shared.puts >= k) {
          proc.pc = 0;
          return {true, ResultKind::Full, 0, false};
        }
        proc.pc = 3;
        return {false, ResultKind::None, 0, false};
      case 3:
        proc.ticket = shared.puts++;
        if (proc.ticket >= k) {
          proc.pc = 0;
          return {true, ResultKind::Full, 0, true};
        }
        proc.pc = 4;
        return {false, ResultKind::None, 0, true};
      case 4: {
        SimCell& cell = shared.cells[proc.ticket];
        std::uint8_t displaced = cell.tag;
        cell.tag = 1;
        cell.value = proc.arg;
        if (displaced == 0) {
          proc.pc = 0;
          return {true, ResultKind::Ok, 0, true};
        }
        proc.pc = 5;  // lost to the canceller
        return {false, ResultKind::None, 0, true};
      }
      case 5:
        shared.cells[proc.ticket] = {2, 0};
        proc.pc = 1;
        return {false, ResultKind::None, 0, true};
      case 6:
        proc.seen_closed = shared.closed;
        proc.pc = 7;
        return {false, ResultKind::None, 0, false};
      case 7:
        if (proc.seen_closed || shared.takes >= k) {
          proc.pc = 0;
          return {true, ResultKind::Closed, 0, false};
        }
        proc.pc = 8;
        return {false, ResultKind::None, 0, false};
      case 8:
        proc.ticket = shared.takes++;
        proc.pc = proc.ticket >= k ? 9 : 10;
        return {false, ResultKind::None, 0, true};
      case 9:
        shared.closed = 1;
        proc.pc = 0;
        return {true, ResultKind::Closed, 0, true};
      default: {  // 10
        SimCell& cell = shared.cells[proc.ticket];
        SimCell displaced = cell;
        cell = {2, 0};
        if (displaced.tag == 1) {
          proc.pc = 0;
          return {true, ResultKind::Value, displaced.value, true};
        }
        proc.pc = 6;  // cancelled an empty slot, retry
        return {false, ResultKind::None, 0, true};
      }
    }
  }
};

// - n-basket from CAS -

struct CasBasketSim {
  struct Config {
    std::uint32_t nprocs = 2;
  };
  struct Shared {
    std::uint8_t closed = 0;
    std::vector<SimCell> cells;
    void encode(std::vector<std::uint64_t>& out) const {
      out.push_back(closed);
      for (const auto& c : cells) {
        out.push_back(c.tag);
        out.push_back(c.value);
      }
    }
  };
  struct Proc {
    std::uint32_t pid = 0;
    std::uint8_t pc = 0;
    std::uint64_t arg = 0;
    bool own_available = true;
    std::vector<std::uint8_t> others;  // untried foreign slots
    std::uint32_t pos = 0;
    SimCell seen;
    void encode(std::vector<std::uint64_t>& out) const {
      out.push_back(pc | (std::uint64_t(own_available) << 8) |
                    (std::uint64_t(pos) << 16));
      out.push_back(seen.tag | (seen.value << 8));
      std::uint64_t set = 0;
      for (auto o : others) set |= 1ull << o;
      out.push_back(set);
      out.push_back(arg);
    }
  };

  // put: 1 read state, 2 read own cell, 3 cas own cell
  // take: 4 read state, 5 pick + (write closed | compete1 read),
  //       6 compete1 read (after closed write), 7 compete1 cas,
  //       8 compete2 read, 9 compete2 cas
  static Shared make_shared(const Config& cfg) {
    Shared s;
    s.cells.resize(cfg.nprocs);
    return s;
  }
  static Proc make_proc(const Config& cfg, std::uint32_t pid) {
    Proc p;
    p.pid = pid;
    for (std::uint32_t i = 0; i < cfg.nprocs; ++i) {
      if (i != pid) p.others.push_back(static_cast<std::uint8_t>(i));
    }
    return p;
  }
  static void begin(Proc& proc, const OpSpec& spec) {
    if (spec.kind == OpKind::Put) {
      proc.pc = 1;
      proc.arg = spec.arg;
    } else if (spec.kind == OpKind::Take) {
      proc.pc = 4;
    } else {
      throw UsageError("basket machine runs put/take ops only");
    }
  }
  static std::uint32_t choices(const Shared&, const Proc& proc) {
    if (proc.pc == 5 && !proc.own_available) {
      return static_cast<std::uint32_t>(proc.others.size());
    }
    return 1;
  }
  static StepResult step(Shared& shared, Proc& proc, std::uint32_t choice) {
    switch (proc.pc) {
      case 1:
        if (shared.closed) {
          proc.pc = 0;
          return {true, ResultKind::Full, 0, false};
        }
        proc.pc = 2;
        return {false, ResultKind::None, 0, false};
      case 2:
        if (shared.cells[proc.pid].tag != 0) {
          proc.pc = 0;
          return {true, ResultKind::Full, 0, false};
        }
        proc.pc = 3;
        return {false, ResultKind::None, 0, false};
      case 3: {
        SimCell& cell = shared.cells[proc.pid];
        if (cell.tag == 0) {
          cell = {1, proc.arg};
          proc.pc = 0;
          return {true, ResultKind::Ok, 0, true};
        }
        proc.pc = 0;
        return {true, ResultKind::Full, 0, true};
      }
      case 4:
        if (shared.closed) {
          proc.pc = 0;
          return {true, ResultKind::Closed, 0, false};
        }
        proc.pc = 5;
        return {false, ResultKind::None, 0, false};
      case 5: {
        if (proc.own_available) {
          proc.own_available = false;
          proc.pos = proc.pid;
        } else {
          // Unreachable with an exhausted set: the process that empties it
          // writes the closed flag, which the preceding state read sees.
          if (proc.others.empty()) throw UsageError("pick from exhausted slot set");
          proc.pos = proc.others[choice];
          proc.others.erase(proc.others.begin() + choice);
        }
        if (!proc.own_available && proc.others.empty()) {
          shared.closed = 1;  // the local pick folds into this write
          proc.pc = 6;
          return {false, ResultKind::None, 0, true};
        }
        // otherwise the pick folds into the first compete's read
        proc.seen = shared.cells[proc.pos];
        if (proc.seen.tag == 2) {
          proc.pc = 4;
          return {false, ResultKind::None, 0, false};
        }
        proc.pc = 7;
        return {false, ResultKind::None, 0, false};
      }
      case 6:
        proc.seen = shared.cells[proc.pos];
        if (proc.seen.tag == 2) {
          proc.pc = 4;
          return {false, ResultKind::None, 0, false};
        }
        proc.pc = 7;
        return {false, ResultKind::None, 0, false};
      case 7: {
        SimCell& cell = shared.cells[proc.pos];
        if (cell.tag == proc.seen.tag && cell.value == proc.seen.value) {
          SimCell won = cell;
          cell = {2, 0};
          if (won.tag == 1) {
            proc.pc = 0;
            return {true, ResultKind::Value, won.value, true};
          }
        }
        proc.pc = 8;  // cancelled or lost; look once more
        return {false, ResultKind::None, 0, true};
      }
      case 8:
        proc.seen = shared.cells[proc.pos];
        if (proc.seen.tag == 2) {
          proc.pc = 4;
          return {false, ResultKind::None, 0, false};
        }
        proc.pc = 9;
        return {false, ResultKind::None, 0, false};
      default: {  // 9
        SimCell& cell = shared.cells[proc.pos];
        if (cell.tag == proc.seen.tag && cell.value == proc.seen.value) {
          SimCell won = cell;
          cell = {2, 0};
          if (won.tag == 1) {
            proc.pc = 0;
            return {true, ResultKind::Value, won.value, true};
          }
        }
        proc.pc = 4;
        return {false, ResultKind::None, 0, true};
      }
    }
  }
};

}  // namespace sim

// --- program builders -------------------------------------------------------

// Alternating ll/ic starting with ll: 2 ops -> (ll; ic), 3 -> (ll; ic; ll).
inline std::vector<std::vector<OpSpec>> llic_programs(std::uint32_t nprocs,
                                                      std::uint32_t ops_per_proc) {
  std::vector<std::vector<OpSpec>> programs(nprocs);
  for (auto& prog : programs) {
    for (std::uint32_t i = 0; i < ops_per_proc; ++i) {
      prog.push_back({i % 2 == 0 ? OpKind::Ll : OpKind::Ic, 0});
    }
  }
  return programs;
}

inline std::vector<std::vector<OpSpec>> fai_programs(std::uint32_t nprocs,
                                                     std::uint32_t ops_per_proc) {
  std::vector<std::vector<OpSpec>> programs(nprocs);
  for (auto& prog : programs) {
    for (std::uint32_t i = 0; i < ops_per_proc; ++i) prog.push_back({OpKind::Fai, 0});
  }
  return programs;
}

// One operation per process; roles[p] true = put (with a distinct item).
inline std::vector<std::vector<OpSpec>> basket_programs(const std::vector<bool>& roles) {
  std::vector<std::vector<OpSpec>> programs(roles.size());
  for (std::size_t p = 0; p < roles.size(); ++p) {
    if (roles[p]) {
      programs[p].push_back({OpKind::Put, 101 + p});
    } else {
      programs[p].push_back({OpKind::Take, 0});
    }
  }
  return programs;
}

}  // namespace mbq
