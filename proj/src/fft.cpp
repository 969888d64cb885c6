#include "mixedsde/fft.hpp"

#include <cmath>
#include <numbers>
#include <utility>

#include "mixedsde/errors.hpp"

namespace mixedsde {

Radix2Fft::Radix2Fft(std::size_t size) : size_(size) {
  if (size == 0 || (size & (size - 1)) != 0) {
    throw DomainError("fft size must be a power of two, got " + std::to_string(size));
  }
  bit_reversal_.resize(size);
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < size) ++bits;
  for (std::size_t i = 0; i < size; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < bits; ++b) r |= ((i >> b) & 1u) << (bits - 1 - b);
    bit_reversal_[i] = r;
  }
  twiddles_.resize(size / 2);
  for (std::size_t k = 0; k < size / 2; ++k) {
    const double angle = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(size);
    twiddles_[k] = {std::cos(angle), std::sin(angle)};
  }
}

void Radix2Fft::transform(std::span<std::complex<double>> data, bool conjugate) const {
  if (data.size() != size_) {
    throw DomainError("fft buffer size mismatch");
  }
  for (std::size_t i = 0; i < size_; ++i) {
    const std::size_t j = bit_reversal_[i];
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= size_; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t stride = size_ / len;
    for (std::size_t start = 0; start < size_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        std::complex<double> w = twiddles_[k * stride];
        if (conjugate) w = std::conj(w);
        const std::complex<double> odd = data[start + k + half] * w;
        const std::complex<double> even = data[start + k];
        data[start + k] = even + odd;
        data[start + k + half] = even - odd;
      }
    }
  }
}

void Radix2Fft::forward(std::span<std::complex<double>> data) const {
  transform(data, /*conjugate=*/false);
}

void Radix2Fft::inverse(std::span<std::complex<double>> data) const {
  transform(data, /*conjugate=*/true);
  const double scale = 1.0 / static_cast<double>(size_);
  for (auto& v : data) v *= scale;
}

}  // namespace mixedsde
