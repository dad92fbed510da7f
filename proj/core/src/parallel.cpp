#include "tactsim/parallel.hpp"

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace tactsim {

int worker_count() {
  if (const char* env = std::getenv("TACTSIM_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (const std::exception&) {
      // fall through to the hardware default on unparseable values
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for_rows(int begin, int end, const std::function<void(int)>& fn) {
  const int total = end - begin;
  if (total <= 0) return;
  const int workers = std::min(worker_count(), total);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  // One contiguous chunk per worker; chunking never changes per-row work, so
  // outputs are identical for any worker count.
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  const int base = total / workers;
  const int extra = total % workers;
  int start = begin;
  for (int w = 0; w < workers; ++w) {
    const int len = base + (w < extra ? 1 : 0);
    const int stop = start + len;
    pool.emplace_back([&fn, start, stop] {
      for (int i = start; i < stop; ++i) fn(i);
    });
    start = stop;
  }
  return;  // jthreads join on destruction
}

}  // namespace tactsim
