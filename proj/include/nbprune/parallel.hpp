// Copyright 2026 The nbprune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef NBPRUNE_PARALLEL_HPP_
#define NBPRUNE_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nbprune {

// Splits [begin, end) into `threads` contiguous chunks and calls
// fn(chunk_begin, chunk_end) on each. Chunk boundaries depend only on the
// range and thread count; callers that need thread-count-independent results
// must write disjoint outputs per index. The first exception thrown by any
// worker is rethrown on the calling thread.
template <class Fn>
void parallel_for(std::size_t begin, std::size_t end, std::size_t threads,
                  Fn&& fn) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  threads = std::clamp<std::size_t>(threads, 1, n);
  if (threads == 1) {
    fn(begin, end);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  workers.reserve(threads);
  const std::size_t chunk = (n + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = begin + t * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    workers.emplace_back([&, lo, hi] {
      try {
        fn(lo, hi);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace nbprune

#endif  // NBPRUNE_PARALLEL_HPP_
