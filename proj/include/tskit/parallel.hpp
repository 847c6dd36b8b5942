#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

#include "tskit/common.hpp"

namespace tskit {

/// Runs fn(begin, end) over a static block partition of [0, count) on up to
/// `threads` std::threads.  The partition depends only on count and threads
/// never on scheduling, so any writer that owns its block produces identical
/// results at every thread count.  threads <= 1 runs inline.
inline void parallel_for_blocks(index_t count, unsigned threads,
                                const std::function<void(index_t, index_t)>& fn) {
  if (count == 0) return;
  if (threads <= 1 || count == 1) {
    fn(0, count);
    return;
  }
  const index_t nblocks = std::min<index_t>(threads, count);
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nblocks);
  const index_t base = count / nblocks, extra = count % nblocks;
  index_t begin = 0;
  for (index_t b = 0; b < nblocks; ++b) {
    const index_t len = base + (b < extra ? 1 : 0);
    const index_t end = begin + len;
    pool.emplace_back([&, b, begin, end]() {
      try {
        fn(begin, end);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    });
    begin = end;
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace tskit
