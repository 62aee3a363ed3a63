#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace lml {

using cplx = std::complex<double>;

/// Radix-2 in-place FFT of a power-of-two length.
class Radix2Fft {
public:
  explicit Radix2Fft(std::size_t n);

  // data[j] <- sum_k data[k] e(sign * j k / n), sign = +1 or -1.
  void transform(std::span<cplx> data, int sign) const;
  std::size_t size() const { return n_; }

private:
  std::size_t n_;
  std::vector<std::size_t> rev_;
  std::vector<cplx> roots_; // e(k / n), k < n/2
};

/// DFT of arbitrary length n: X_j = sum_k x_k e(sign * j k / n).
///
/// Powers of two go straight to Radix2Fft; other lengths use Bluestein's
/// chirp, i.e. a cyclic convolution zero-padded to a power of two. Chirp
/// and twiddle arguments are reduced in integers, so results are bit-stable
/// across runs.
class Dft {
public:
  explicit Dft(std::size_t n);

  std::vector<cplx> operator()(std::span<const cplx> in, int sign) const;
  std::size_t size() const { return n_; }

private:
  std::size_t n_;
  bool pow2_;
  Radix2Fft fft_;
  std::vector<cplx> chirp_;     // e(k^2 / 2n)
  std::vector<cplx> kernel_hat_; // FFT of conj chirp, for sign = +1
};

// e(p / q) for integers, with p reduced modulo q first.
cplx unit_root(long long p, long long q);

} // namespace lml
