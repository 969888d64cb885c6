#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace mixedsde {

/// Maps 0 to the hardware thread count, clamps to [1, 256].
int resolve_workers(int requested);

/// Runs body(first, last) over fixed-size chunks of [0, count) on a
/// small thread pool. The chunk decomposition depends only on count and
/// chunk_size, never on the worker count, so callers that store results
/// per index (or per chunk) and reduce in index order get identical
/// results for any number of workers. Exceptions thrown by body are
/// rethrown on the calling thread.
void parallel_chunks(std::int64_t count, int workers, std::int64_t chunk_size,
                     const std::function<void(std::int64_t, std::int64_t)>& body);

/// Neumaier compensated accumulator.
class NeumaierSum {
 public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Compensated sum of a span, in index order.
double compensated_sum(std::span<const double> values);

}  // namespace mixedsde
