#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace lml {

using cplx = std::complex<double>;

namespace arith {

bool is_prime(std::uint64_t n);

// Distinct prime factors by trial division.
std::vector<std::uint64_t> prime_factors(std::uint64_t n);

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);
// Inverse of a modulo m; throws if gcd(a, m) != 1.
std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t m);

// Euler phi by trial division.
std::uint64_t euler_phi(std::uint64_t n);

/// Prime modulus q >= 5 together with its least primitive root.
class PrimeModulus {
public:
  explicit PrimeModulus(std::uint64_t q);
  PrimeModulus(std::uint64_t q, std::uint64_t generator);

  std::uint64_t q() const { return q_; }
  std::uint64_t generator() const { return g_; }
  double log_q() const;

private:
  std::uint64_t q_;
  std::uint64_t g_;
};

// Least primitive root of a prime q >= 5.
std::uint64_t find_generator(std::uint64_t q);

// Number of even primitive characters modulo a prime q >= 5.
std::uint64_t phi_plus(std::uint64_t q);

/// Dyadic rational num / 2^log2_den, held exactly.
struct DyadicRational {
  std::uint64_t num = 0;
  int log2_den = 0;

  double to_double() const;
  friend bool operator==(const DyadicRational &, const DyadicRational &) = default;
};

/// Exact Dirichlet coefficients of zeta(s)^{1/2} on 1..N.
///
/// d(p^k) = C(2k,k)/4^k and the sequence is multiplicative. Entry i holds
/// d(i+1), reduced so that the numerator is odd (or the value is zero).
std::vector<DyadicRational> dirichlet_sqrt_coeffs(std::size_t N);

// Same coefficients as doubles, index i holding d(i+1).
std::vector<double> dirichlet_sqrt_values(std::size_t N);

// Sum over a, b <= x of d(a) d(b) / lcm(a, b) with d the zeta^{1/2}
// coefficients. Uses gcd(a,b) = sum_{e | a, e | b} phi(e).
double lcm_weighted_sum(std::size_t x);

enum class CoeffOrigin { unit, d_half, convolution, file, seeded_random };

std::string to_string(CoeffOrigin origin);

/// Dirichlet-polynomial coefficients alpha_a for 1 <= a <= floor(q^kappa).
class CoefficientVector {
public:
  static constexpr double growth_constant = 10.0;
  static constexpr double growth_exponent = 0.1;

  // values[i] holds alpha_{i+1}. Throws std::invalid_argument when the
  // support exceeds q^kappa or a coefficient breaks |alpha_a| <= 10 a^0.1.
  CoefficientVector(std::uint64_t q, double kappa, std::vector<cplx> values,
                    CoeffOrigin origin);

  std::uint64_t q() const { return q_; }
  double kappa() const { return kappa_; }
  CoeffOrigin origin() const { return origin_; }
  // Largest admissible index floor(q^kappa).
  std::size_t max_index() const { return max_index_; }
  // Number of stored entries; indices 1..length().
  std::size_t length() const { return values_.size(); }
  cplx operator[](std::size_t a) const {
    return a >= 1 && a <= values_.size() ? values_[a - 1] : cplx{};
  }
  std::span<const cplx> values() const { return values_; }

private:
  std::uint64_t q_;
  double kappa_;
  std::size_t max_index_;
  std::vector<cplx> values_;
  CoeffOrigin origin_;
};

// floor(q^kappa), robust to rounding at exact powers.
std::size_t support_limit(std::uint64_t q, double kappa);

// Points uniform on the closed unit disk from mt19937_64(seed): two draws
// u1, u2 = (x >> 11) 2^-53 each, mapped to sqrt(u1) e(u2).
std::vector<cplx> unit_disk_samples(std::size_t n, std::uint64_t seed);

CoefficientVector unit_coeffs(std::uint64_t q, double kappa);
CoefficientVector d_half_coeffs(std::uint64_t q, double kappa);
// Entries uniform on the closed unit disk, drawn from std::mt19937_64.
CoefficientVector random_coeffs(std::uint64_t q, double kappa,
                                std::uint64_t seed);

// (eta * lambda)_a = sum_{a = a1 a2} eta_{a1} lambda_{a2}, kappa adding.
CoefficientVector convolve_coeffs(const CoefficientVector &eta,
                                  const CoefficientVector &lambda);

// CSV with header `a,value_re,value_im`, 1-based strictly increasing indices.
CoefficientVector read_coeffs_csv(const std::filesystem::path &path,
                                  std::uint64_t q, double kappa);
void write_coeffs_csv(const std::filesystem::path &path,
                      const CoefficientVector &coeffs);

} // namespace arith
} // namespace lml
