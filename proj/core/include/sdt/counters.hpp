// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>

namespace sdt {

/// Work counters filled in by the encoded-spike operators.
///
/// `executed` counts the operations the sparse engine actually performed and
/// `dense` the operations a dense engine would perform on the same layer, so
/// that `dense - executed` is the number of skipped operations.
struct OpCounters {
  std::uint64_t executed = 0;
  std::uint64_t dense = 0;
  std::uint64_t comparator_steps = 0;
  std::uint64_t accumulates = 0;
  std::uint64_t input_spikes = 0;
  std::uint64_t input_slots = 0;

  OpCounters& operator+=(const OpCounters& o) noexcept {
    executed += o.executed;
    dense += o.dense;
    comparator_steps += o.comparator_steps;
    accumulates += o.accumulates;
    input_spikes += o.input_spikes;
    input_slots += o.input_slots;
    return *this;
  }
  friend bool operator==(const OpCounters&, const OpCounters&) = default;
};

/// Execution knobs shared by every operator. Results never depend on
/// `threads`.
struct Exec {
  unsigned threads = 1;
  OpCounters* counters = nullptr;
};

/// Thread-safe accumulation target for workers; sums are order independent.
class CounterSink {
 public:
  void add_executed(std::uint64_t n) noexcept { executed_.fetch_add(n, std::memory_order_relaxed); }
  void add_steps(std::uint64_t n) noexcept { steps_.fetch_add(n, std::memory_order_relaxed); }
  void add_accumulates(std::uint64_t n) noexcept { accum_.fetch_add(n, std::memory_order_relaxed); }

  void flush(OpCounters* out) const noexcept {
    if (out == nullptr) return;
    out->executed += executed_.load();
    out->comparator_steps += steps_.load();
    out->accumulates += accum_.load();
  }

 private:
  std::atomic<std::uint64_t> executed_{0};
  std::atomic<std::uint64_t> steps_{0};
  std::atomic<std::uint64_t> accum_{0};
};

}  // namespace sdt
