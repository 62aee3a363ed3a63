#include "lml/fft.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lml {

cplx unit_root(long long p, long long q) {
  long long r = p % q;
  if (r < 0)
    r += q;
  if (2 * r > q)
    r -= q;
  const double theta = 2.0 * std::numbers::pi * static_cast<double>(r) /
                       static_cast<double>(q);
  return {std::cos(theta), std::sin(theta)};
}

Radix2Fft::Radix2Fft(std::size_t n) : n_(n) {
  if (n == 0 || !std::has_single_bit(n))
    throw std::invalid_argument("Radix2Fft: length must be a power of two");
  const int bits = std::countr_zero(n);
  rev_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (int b = 0; b < bits; ++b)
      if (i & (std::size_t{1} << b))
        r |= std::size_t{1} << (bits - 1 - b);
    rev_[i] = r;
  }
  roots_.resize(n / 2 + (n == 1));
  for (std::size_t k = 0; k < n / 2; ++k)
    roots_[k] = unit_root(static_cast<long long>(k), static_cast<long long>(n));
}

void Radix2Fft::transform(std::span<cplx> data, int sign) const {
  if (data.size() != n_)
    throw std::invalid_argument("Radix2Fft: size mismatch");
  for (std::size_t i = 0; i < n_; ++i)
    if (i < rev_[i])
      std::swap(data[i], data[rev_[i]]);
  for (std::size_t len = 2; len <= n_; len <<= 1) {
    const std::size_t half = len / 2, stride = n_ / len;
    for (std::size_t start = 0; start < n_; start += len) {
      for (std::size_t k = 0; k < half; ++k) {
        cplx w = roots_[k * stride];
        if (sign < 0)
          w = std::conj(w);
        const cplx u = data[start + k];
        const cplx v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

namespace {

std::size_t bluestein_length(std::size_t n) {
  return n == 0 ? 1 : std::bit_ceil(2 * n - 1);
}

} // namespace

Dft::Dft(std::size_t n)
    : n_(n), pow2_(n > 0 && std::has_single_bit(n)),
      fft_(pow2_ ? n : bluestein_length(n)) {
  if (n == 0)
    throw std::invalid_argument("Dft: empty length");
  if (pow2_)
    return;
  const auto two_n = static_cast<long long>(2 * n);
  chirp_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<long long>(k);
    chirp_[k] = unit_root((kk * kk) % two_n, two_n);
  }
  const std::size_t m = fft_.size();
  kernel_hat_.assign(m, cplx{});
  kernel_hat_[0] = std::conj(chirp_[0]);
  for (std::size_t k = 1; k < n; ++k)
    kernel_hat_[k] = kernel_hat_[m - k] = std::conj(chirp_[k]);
  fft_.transform(kernel_hat_, -1);
}

std::vector<cplx> Dft::operator()(std::span<const cplx> in, int sign) const {
  if (in.size() != n_)
    throw std::invalid_argument("Dft: size mismatch");
  if (pow2_) {
    std::vector<cplx> out(in.begin(), in.end());
    fft_.transform(out, sign);
    return out;
  }
  // j k = (j^2 + k^2 - (j-k)^2) / 2, so for sign = +1
  // X_j = c_j sum_k (x_k c_k) conj(c_{j-k}) with c_k = e(k^2/2n).
  // sign = -1 is handled by conjugating input and output.
  const std::size_t m = fft_.size();
  std::vector<cplx> buf(m, cplx{});
  for (std::size_t k = 0; k < n_; ++k) {
    const cplx x = sign > 0 ? in[k] : std::conj(in[k]);
    buf[k] = x * chirp_[k];
  }
  fft_.transform(buf, -1);
  for (std::size_t i = 0; i < m; ++i)
    buf[i] *= kernel_hat_[i];
  fft_.transform(buf, +1);
  const double scale = 1.0 / static_cast<double>(m);
  std::vector<cplx> out(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    const cplx y = buf[j] * scale * chirp_[j];
    out[j] = sign > 0 ? y : std::conj(y);
  }
  return out;
}

} // namespace lml
