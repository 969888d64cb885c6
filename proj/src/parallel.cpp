#include "mixedsde/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include "mixedsde/errors.hpp"

namespace mixedsde {

int resolve_workers(int requested) {
  if (requested < 0) throw PlanError("worker count must be nonnegative");
  int n = requested;
  if (n == 0) n = static_cast<int>(std::thread::hardware_concurrency());
  return std::clamp(n, 1, 256);
}

void parallel_chunks(std::int64_t count, int workers, std::int64_t chunk_size,
                     const std::function<void(std::int64_t, std::int64_t)>& body) {
  if (count <= 0) return;
  if (chunk_size <= 0) throw PlanError("chunk size must be positive");
  const int n_workers = std::min<std::int64_t>(resolve_workers(workers),
                                               (count + chunk_size - 1) / chunk_size);
  if (n_workers <= 1) {
    for (std::int64_t begin = 0; begin < count; begin += chunk_size) {
      body(begin, std::min(begin + chunk_size, count));
    }
    return;
  }

  std::atomic<std::int64_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto run = [&] {
    for (;;) {
      const std::int64_t begin = next.fetch_add(chunk_size);
      if (begin >= count) return;
      try {
        body(begin, std::min(begin + chunk_size, count));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

double compensated_sum(std::span<const double> values) {
  NeumaierSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

}  // namespace mixedsde
