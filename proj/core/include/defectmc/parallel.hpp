#pragma once

#include "defectmc/error.hpp"

#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace defectmc {

/// A task of a parallel_map threw; names the task that failed first in
/// task order.
class TaskFailure : public NumericalError {
public:
  TaskFailure(std::size_t index, std::string task, const std::string& message)
      : NumericalError("task " + task + " failed: " + message), index_(index), task_(std::move(task)) {}

  std::size_t index() const { return index_; }
  const std::string& task() const { return task_; }

private:
  std::size_t index_;
  std::string task_;
};

template <typename Result>
struct TimedResult {
  Result value;
  double seconds = 0.0;
};

/// Runs fn(0..count-1) on `workers` threads and returns results in task
/// order. Output never depends on the worker count or on scheduling.
template <typename Fn>
auto parallel_map(std::size_t count, int workers, Fn&& fn,
                  const std::function<std::string(std::size_t)>& describe = {})
    -> std::vector<TimedResult<decltype(fn(std::size_t{}))>> {
  using Result = decltype(fn(std::size_t{}));
  if (workers < 1) throw ConfigError("worker count must be >= 1");

  std::vector<std::optional<TimedResult<Result>>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};

  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      if (failed.load(std::memory_order_relaxed)) return;
      try {
        const auto start = std::chrono::steady_clock::now();
        Result value = fn(i);
        const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
        slots[i].emplace(TimedResult<Result>{std::move(value), elapsed.count()});
      } catch (...) {
        errors[i] = std::current_exception();
        failed = true;
      }
    }
  };

  const auto threads = static_cast<std::size_t>(workers) < count ? static_cast<std::size_t>(workers) : count;
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  for (std::size_t i = 0; i < count; ++i) {
    if (!errors[i]) continue;
    const std::string name = describe ? describe(i) : "#" + std::to_string(i);
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw TaskFailure(i, name, e.what());
    } catch (...) {
      throw TaskFailure(i, name, "unknown exception");
    }
  }
  std::vector<TimedResult<Result>> results;
  results.reserve(count);
  for (auto& slot : slots) {
    if (!slot) throw NumericalError("parallel_map aborted before all tasks ran");
    results.push_back(std::move(*slot));
  }
  return results;
}

} // namespace defectmc
