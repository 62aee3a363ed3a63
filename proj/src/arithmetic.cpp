#include "lml/arithmetic.hpp"

#include "lml/io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

namespace lml::arith {

bool is_prime(std::uint64_t n) {
  if (n < 2)
    return false;
  if (n % 2 == 0)
    return n == 2;
  for (std::uint64_t d = 3; d * d <= n; d += 2)
    if (n % d == 0)
      return false;
  return true;
}

std::vector<std::uint64_t> prime_factors(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t d = 2; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      while (n % d == 0)
        n /= d;
    }
  }
  if (n > 1)
    out.push_back(n);
  return out;
}

std::uint64_t mul_mod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t pow_mod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1)
      r = mul_mod(r, base, m);
    base = mul_mod(base, base, m);
    exp >>= 1;
  }
  return r;
}

std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t m) {
  std::int64_t old_r = static_cast<std::int64_t>(a % m), r = static_cast<std::int64_t>(m);
  std::int64_t old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t quot = old_r / r;
    std::int64_t t = old_r - quot * r;
    old_r = r;
    r = t;
    t = old_s - quot * s;
    old_s = s;
    s = t;
  }
  if (old_r != 1)
    throw std::invalid_argument("inverse_mod: not invertible");
  const auto sm = static_cast<std::int64_t>(m);
  return static_cast<std::uint64_t>(((old_s % sm) + sm) % sm);
}

std::uint64_t euler_phi(std::uint64_t n) {
  std::uint64_t r = n;
  for (auto p : prime_factors(n))
    r = r / p * (p - 1);
  return r;
}

namespace {

void require_prime_modulus(std::uint64_t q) {
  if (q < 5)
    throw std::invalid_argument("modulus must be a prime >= 5, got " +
                                std::to_string(q));
  if (!is_prime(q))
    throw std::invalid_argument("modulus is not prime: " + std::to_string(q));
}

bool is_primitive_root(std::uint64_t g, std::uint64_t q,
                       const std::vector<std::uint64_t> &factors) {
  if (g % q == 0)
    return false;
  for (auto p : factors)
    if (pow_mod(g, (q - 1) / p, q) == 1)
      return false;
  return true;
}

} // namespace

std::uint64_t find_generator(std::uint64_t q) {
  require_prime_modulus(q);
  const auto factors = prime_factors(q - 1);
  for (std::uint64_t g = 2; g < q; ++g)
    if (is_primitive_root(g, q, factors))
      return g;
  throw std::logic_error("no primitive root found");
}

std::uint64_t phi_plus(std::uint64_t q) {
  require_prime_modulus(q);
  return (q - 3) / 2;
}

PrimeModulus::PrimeModulus(std::uint64_t q) : q_(q), g_(find_generator(q)) {}

PrimeModulus::PrimeModulus(std::uint64_t q, std::uint64_t generator)
    : q_(q), g_(generator) {
  require_prime_modulus(q);
  if (!is_primitive_root(generator, q, prime_factors(q - 1)))
    throw std::invalid_argument("not a primitive root modulo q");
}

double PrimeModulus::log_q() const { return std::log(static_cast<double>(q_)); }

// ---------------------------------------------------------------------------

double DyadicRational::to_double() const {
  return std::ldexp(static_cast<double>(num), -log2_den);
}

std::vector<DyadicRational> dirichlet_sqrt_coeffs(std::size_t N) {
  // central binomials C(2k,k) for k < 64 would overflow; k <= 40 is plenty
  // since 2^k <= N.
  std::vector<std::uint64_t> central(41, 1);
  for (std::size_t k = 1; k < central.size(); ++k)
    central[k] = central[k - 1] * (2 * (2 * k - 1)) / k;

  std::vector<std::uint32_t> spf(N + 1, 0);
  for (std::size_t i = 2; i <= N; ++i)
    if (spf[i] == 0)
      for (std::size_t j = i; j <= N; j += i)
        if (spf[j] == 0)
          spf[j] = static_cast<std::uint32_t>(i);

  std::vector<DyadicRational> d(N);
  for (std::size_t n = 1; n <= N; ++n) {
    std::uint64_t num = 1;
    int den = 0;
    std::size_t m = n;
    while (m > 1) {
      const std::size_t p = spf[m];
      int k = 0;
      while (m % p == 0) {
        m /= p;
        ++k;
      }
      num *= central[k];
      den += 2 * k;
    }
    const int tz = std::min(std::countr_zero(num), den);
    d[n - 1] = {num >> tz, den - tz};
  }
  return d;
}

std::vector<double> dirichlet_sqrt_values(std::size_t N) {
  const auto exact = dirichlet_sqrt_coeffs(N);
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i)
    out[i] = exact[i].to_double();
  return out;
}

double lcm_weighted_sum(std::size_t x) {
  if (x < 1)
    throw std::invalid_argument("lcm_weighted_sum: x >= 1 required");
  const auto d = dirichlet_sqrt_values(x);
  std::vector<std::uint64_t> phi(x + 1);
  std::iota(phi.begin(), phi.end(), std::uint64_t{0});
  for (std::size_t p = 2; p <= x; ++p)
    if (phi[p] == p)
      for (std::size_t j = p; j <= x; j += p)
        phi[j] -= phi[j] / p;

  double total = 0.0;
  for (std::size_t e = 1; e <= x; ++e) {
    double inner = 0.0;
    for (std::size_t a = e; a <= x; a += e)
      inner += d[a - 1] / static_cast<double>(a);
    total += static_cast<double>(phi[e]) * inner * inner;
  }
  return total;
}

// ---------------------------------------------------------------------------

std::string to_string(CoeffOrigin origin) {
  switch (origin) {
  case CoeffOrigin::unit:
    return "unit";
  case CoeffOrigin::d_half:
    return "d_half";
  case CoeffOrigin::convolution:
    return "convolution";
  case CoeffOrigin::file:
    return "file";
  case CoeffOrigin::seeded_random:
    return "seeded_random";
  }
  return "unknown";
}

std::size_t support_limit(std::uint64_t q, double kappa) {
  const double p = std::pow(static_cast<double>(q), kappa);
  return static_cast<std::size_t>(std::floor(p * (1.0 + 1e-12)));
}

CoefficientVector::CoefficientVector(std::uint64_t q, double kappa,
                                     std::vector<cplx> values,
                                     CoeffOrigin origin)
    : q_(q), kappa_(kappa), max_index_(0), values_(std::move(values)),
      origin_(origin) {
  if (!(kappa > 0.0 && kappa < 1.0))
    throw std::invalid_argument("kappa must lie in (0,1)");
  max_index_ = support_limit(q, kappa);
  while (!values_.empty() && values_.back() == cplx{})
    values_.pop_back();
  if (values_.size() > max_index_)
    throw std::invalid_argument("coefficient index " +
                                std::to_string(values_.size()) +
                                " exceeds q^kappa = " +
                                std::to_string(max_index_));
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double a = static_cast<double>(i + 1);
    const cplx v = values_[i];
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()) ||
        std::abs(v) > growth_constant * std::pow(a, growth_exponent))
      throw std::invalid_argument("coefficient at a=" + std::to_string(i + 1) +
                                  " violates |alpha_a| <= 10 a^0.1");
  }
}

CoefficientVector unit_coeffs(std::uint64_t q, double kappa) {
  return {q, kappa, {cplx{1.0, 0.0}}, CoeffOrigin::unit};
}

CoefficientVector d_half_coeffs(std::uint64_t q, double kappa) {
  const auto n = support_limit(q, kappa);
  const auto d = dirichlet_sqrt_values(n);
  return {q, kappa, std::vector<cplx>(d.begin(), d.end()), CoeffOrigin::d_half};
}

std::vector<cplx> unit_disk_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::vector<cplx> v(n);
  for (auto &x : v) {
    const double u1 = static_cast<double>(eng() >> 11) * 0x1p-53;
    const double u2 = static_cast<double>(eng() >> 11) * 0x1p-53;
    x = std::polar(std::sqrt(u1), 2.0 * std::numbers::pi * u2);
  }
  return v;
}

CoefficientVector random_coeffs(std::uint64_t q, double kappa,
                                std::uint64_t seed) {
  return {q, kappa, unit_disk_samples(support_limit(q, kappa), seed),
          CoeffOrigin::seeded_random};
}

CoefficientVector convolve_coeffs(const CoefficientVector &eta,
                                  const CoefficientVector &lambda) {
  if (eta.q() != lambda.q())
    throw std::invalid_argument("convolve_coeffs: moduli differ");
  const double kappa = eta.kappa() + lambda.kappa();
  if (kappa >= 1.0)
    throw std::invalid_argument("convolve_coeffs: kappa1 + kappa2 >= 1");
  const std::size_t n1 = eta.length(), n2 = lambda.length();
  std::vector<cplx> out(n1 * n2);
  for (std::size_t a1 = 1; a1 <= n1; ++a1)
    for (std::size_t a2 = 1; a2 <= n2; ++a2)
      out[a1 * a2 - 1] += eta[a1] * lambda[a2];
  return {eta.q(), kappa, std::move(out), CoeffOrigin::convolution};
}

CoefficientVector read_coeffs_csv(const std::filesystem::path &path,
                                  std::uint64_t q, double kappa) {
  std::ifstream in(path);
  if (!in)
    throw std::invalid_argument("cannot open coefficient file " +
                                path.string());
  std::string line;
  if (!std::getline(in, line) || io::split_csv_line(line) !=
                                     std::vector<std::string>{"a", "value_re", "value_im"})
    throw std::invalid_argument("coefficient file header must be "
                                "`a,value_re,value_im`");
  std::vector<cplx> values;
  std::size_t last = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r")
      continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 3)
      throw std::invalid_argument("malformed coefficient row: " + line);
    std::size_t a = 0;
    double re = 0, im = 0;
    try {
      a = std::stoull(f[0]);
      re = std::stod(f[1]);
      im = std::stod(f[2]);
    } catch (const std::exception &) {
      throw std::invalid_argument("malformed coefficient row: " + line);
    }
    if (a <= last)
      throw std::invalid_argument(
          "coefficient indices must be 1-based and strictly increasing");
    if (a > support_limit(q, kappa))
      throw std::invalid_argument("coefficient index exceeds q^kappa");
    values.resize(a);
    values[a - 1] = {re, im};
    last = a;
  }
  return {q, kappa, std::move(values), CoeffOrigin::file};
}

void write_coeffs_csv(const std::filesystem::path &path,
                      const CoefficientVector &coeffs) {
  io::write_atomically(path, [&](std::ostream &out) {
    out << "a,value_re,value_im\n";
    for (std::size_t a = 1; a <= coeffs.length(); ++a)
      out << a << ',' << io::format_double(coeffs[a].real()) << ','
          << io::format_double(coeffs[a].imag()) << '\n';
  });
}

} // namespace lml::arith
