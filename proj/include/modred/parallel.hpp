#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

namespace modred {

/// Thread cap: MODRED_THREADS if set, hardware concurrency otherwise.
inline unsigned thread_limit() {
  if (const char* env = std::getenv("MODRED_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

/// Runs fn(chunk_begin, chunk_end) over `count` items split into a fixed
/// number of chunks. The chunk layout depends only on `count` and `chunks`,
/// never on the thread count, so results (and any per-chunk sequential state
/// such as warm starts) are identical no matter how many workers run.
inline void parallel_for_chunks(std::size_t count, std::size_t chunks,
                                const std::function<void(std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  chunks = std::max<std::size_t>(1, std::min(chunks, count));
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  ranges.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    const std::size_t b = count * c / chunks;
    const std::size_t e = count * (c + 1) / chunks;
    if (b < e) ranges.emplace_back(b, e);
  }
  const unsigned workers = std::min<unsigned>(thread_limit(), static_cast<unsigned>(ranges.size()));
  if (workers <= 1) {
    for (const auto& [b, e] : ranges) fn(b, e);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= ranges.size()) return;
          fn(ranges[i].first, ranges[i].second);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
}

}  // namespace modred
