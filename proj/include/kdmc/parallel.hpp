// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kdmc {

/// Particles per work item. Fixed so that partial sums, and therefore the
/// merged result, do not depend on the number of workers.
inline constexpr std::size_t particle_block_size = 256;

inline std::size_t block_count(std::size_t items) {
  return (items + particle_block_size - 1) / particle_block_size;
}

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

/// Run fn(block) for every block index in [0, blocks), spreading blocks over
/// `workers` threads. The first exception thrown by any block is rethrown.
template <class Fn>
void for_each_block(std::size_t blocks, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(resolve_workers(workers),
                                            static_cast<unsigned>(std::max<std::size_t>(blocks, 1))));
  if (workers == 1) {
    for (std::size_t b = 0; b < blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (;;) {
      std::size_t b = next.fetch_add(1);
      if (b >= blocks) return;
      try {
        fn(b);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(blocks);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace kdmc
