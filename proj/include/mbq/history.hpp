#pragma once

// History recording for the checking harnesses. Instrumented wrappers
// around queue/LL-IC/basket operations log invocation and response events
// stamped by a global monotone clock; the resulting totally ordered event
// list is what the violation checkers and the linearization oracle
// consume.
//
// Serialized form, one event per line:
//
//   ts op_id proc object kind label
//
// kind is "inv" or "res"; the label is the operation name followed by the
// argument (invocations) or the result (responses).

#include <atomic>
#include <cstdint>
#include <istream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "mbq/common.hpp"
#include "mbq/process.hpp"

namespace mbq {

enum class EventKind : std::uint8_t { Invocation, Response };

struct HistoryEvent {
  std::uint64_t ts = 0;
  std::uint64_t op_id = 0;
  std::uint32_t process = 0;
  std::string object;  // single token
  EventKind kind = EventKind::Invocation;
  std::string label;   // "enq 42", "deq", "deq empty", "ll 3", ...

  bool operator==(const HistoryEvent&) const = default;
};

using History = std::vector<HistoryEvent>;

// Thread-safe append-only event log. A single lock both serializes the
// appends and hands out the timestamps, so ts order and append order
// coincide and are consistent with real time.
class Recorder {
 public:
  std::uint64_t new_op_id() { return next_op_id_.fetch_add(1); }

  void record(HistoryEvent event) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (event.kind == EventKind::Invocation) {
      if (!open_.insert(event.op_id).second) {
        throw UsageError("duplicate invocation for op " + std::to_string(event.op_id));
      }
    } else {
      if (open_.erase(event.op_id) == 0) {
        throw UsageError("response without invocation for op " +
                         std::to_string(event.op_id));
      }
    }
    event.ts = clock_++;
    events_.push_back(std::move(event));
  }

  std::uint64_t invoke(std::uint32_t process, const std::string& object,
                       std::string label) {
    std::uint64_t id = new_op_id();
    record(HistoryEvent{0, id, process, object, EventKind::Invocation,
                        std::move(label)});
    return id;
  }

  void respond(std::uint64_t op_id, std::uint32_t process,
               const std::string& object, std::string label) {
    record(HistoryEvent{0, op_id, process, object, EventKind::Response,
                        std::move(label)});
  }

  History snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return events_;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return events_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::uint64_t clock_ = 0;
  std::atomic<std::uint64_t> next_op_id_{0};
  std::unordered_set<std::uint64_t> open_;
  History events_;
};

// Queue wrapper that logs every operation.
template <class Queue>
class RecordedQueue {
 public:
  RecordedQueue(Queue& queue, Recorder& recorder, std::string object = "queue")
      : queue_(queue), recorder_(recorder), object_(std::move(object)) {}

  std::uint64_t enqueue(ProcessHandle& h, Item x) {
    std::uint64_t op = recorder_.invoke(h.pid(), object_, "enq " + std::to_string(x));
    std::uint64_t index = queue_.enqueue(h, x);
    recorder_.respond(op, h.pid(), object_, "enq ok");
    return index;
  }

  std::optional<Item> dequeue(ProcessHandle& h) {
    std::uint64_t op = recorder_.invoke(h.pid(), object_, "deq");
    std::optional<Item> x = queue_.dequeue(h);
    recorder_.respond(op, h.pid(), object_,
                      x ? "deq " + std::to_string(*x) : "deq empty");
    return x;
  }

 private:
  Queue& queue_;
  Recorder& recorder_;
  std::string object_;
};

// --- serialization ------------------------------------------------------

inline void write_history(const History& history, std::ostream& out) {
  for (const auto& e : history) {
    out << e.ts << ' ' << e.op_id << ' ' << e.process << ' ' << e.object << ' '
        << (e.kind == EventKind::Invocation ? "inv" : "res") << ' ' << e.label
        << '\n';
  }
}

inline std::string history_to_string(const History& history) {
  std::ostringstream out;
  write_history(history, out);
  return out.str();
}

inline History read_history(std::istream& in) {
  History history;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    HistoryEvent e;
    std::string kind;
    if (!(fields >> e.ts >> e.op_id >> e.process >> e.object >> kind)) {
      throw UsageError("malformed history line " + std::to_string(lineno));
    }
    if (kind == "inv") {
      e.kind = EventKind::Invocation;
    } else if (kind == "res") {
      e.kind = EventKind::Response;
    } else {
      throw UsageError("bad event kind on line " + std::to_string(lineno));
    }
    std::string rest;
    std::getline(fields, rest);
    if (!rest.empty() && rest.front() == ' ') rest.erase(0, 1);
    if (rest.empty()) throw UsageError("missing label on line " + std::to_string(lineno));
    e.label = std::move(rest);
    history.push_back(std::move(e));
  }
  return history;
}

// --- paired operation view ----------------------------------------------

enum class OpKind : std::uint8_t { Enq, Deq, Ll, Ic, Put, Take, Fai };

enum class ResultKind : std::uint8_t { None, Ok, Full, Empty, Closed, Value };

struct OpRecord {
  std::uint64_t op_id = 0;
  std::uint32_t process = 0;
  OpKind kind = OpKind::Enq;
  std::uint64_t arg = 0;         // enq/put payload
  bool has_arg = false;
  ResultKind result = ResultKind::None;
  std::uint64_t result_value = 0;  // deq/take/ll/fai result payload
  std::uint64_t inv_ts = 0;
  std::uint64_t resp_ts = 0;
};

inline std::optional<OpKind> parse_op_name(const std::string& name) {
  if (name == "enq") return OpKind::Enq;
  if (name == "deq") return OpKind::Deq;
  if (name == "ll") return OpKind::Ll;
  if (name == "ic") return OpKind::Ic;
  if (name == "put") return OpKind::Put;
  if (name == "take") return OpKind::Take;
  if (name == "fai") return OpKind::Fai;
  return std::nullopt;
}

// Pairs invocations with responses. Histories handed to the checkers and
// the oracle must be complete: every invocation answered.
inline std::vector<OpRecord> pair_operations(const History& history) {
  std::vector<OpRecord> ops;
  std::unordered_map<std::uint64_t, std::size_t> open;
  for (const auto& e : history) {
    std::istringstream label(e.label);
    std::string name;
    label >> name;
    auto kind = parse_op_name(name);
    if (!kind) throw UsageError("unknown operation '" + name + "'");
    if (e.kind == EventKind::Invocation) {
      if (open.count(e.op_id)) throw UsageError("duplicate invocation");
      OpRecord op;
      op.op_id = e.op_id;
      op.process = e.process;
      op.kind = *kind;
      op.inv_ts = e.ts;
      std::uint64_t arg;
      if (label >> arg) {
        op.arg = arg;
        op.has_arg = true;
      }
      open.emplace(e.op_id, ops.size());
      ops.push_back(op);
    } else {
      auto it = open.find(e.op_id);
      if (it == open.end()) throw UsageError("response without invocation");
      OpRecord& op = ops[it->second];
      op.resp_ts = e.ts;
      std::string token;
      if (label >> token) {
        if (token == "ok") {
          op.result = ResultKind::Ok;
        } else if (token == "full") {
          op.result = ResultKind::Full;
        } else if (token == "empty") {
          op.result = ResultKind::Empty;
        } else if (token == "closed") {
          op.result = ResultKind::Closed;
        } else {
          op.result = ResultKind::Value;
          op.result_value = std::stoull(token);
        }
      } else {
        op.result = ResultKind::Ok;
      }
      open.erase(it);
    }
  }
  if (!open.empty()) throw UsageError("incomplete history: pending operations remain");
  return ops;
}

}  // namespace mbq
