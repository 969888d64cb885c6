#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace mixedsde {

/// In-place iterative radix-2 FFT with precomputed twiddles and
/// bit-reversal table. Instances are immutable after construction and
/// safe to share across threads.
class Radix2Fft {
 public:
  /// size must be a power of two >= 1.
  explicit Radix2Fft(std::size_t size);

  std::size_t size() const noexcept { return size_; }

  /// Unnormalized forward transform, X_k = sum_j x_j e^{-2πi jk/n}.
  void forward(std::span<std::complex<double>> data) const;

  /// Inverse transform scaled by 1/n.
  void inverse(std::span<std::complex<double>> data) const;

 private:
  void transform(std::span<std::complex<double>> data, bool conjugate) const;

  std::size_t size_;
  std::vector<std::size_t> bit_reversal_;
  std::vector<std::complex<double>> twiddles_;  // e^{-2πi k/n}, k < n/2
};

}  // namespace mixedsde
