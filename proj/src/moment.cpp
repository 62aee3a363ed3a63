#include "lml/moment.hpp"

#include "lml/io.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lml::moment {

namespace {

constexpr double pi = std::numbers::pi;

std::string json_escape(const std::string &s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\')
      out.push_back('\\');
    out.push_back(c);
  }
  return out;
}

std::string json_pair(cplx z) {
  return "[" + io::format_double(z.real()) + "," + io::format_double(z.imag()) + "]";
}

cplx pow_real(double base, cplx exponent) {
  return std::exp(exponent * std::log(base));
}

void check_modulus(std::uint64_t q, const arith::CoefficientVector &coeffs) {
  if (coeffs.q() != q)
    throw std::invalid_argument("coefficient vector was built for q = " +
                                std::to_string(coeffs.q()));
}

} // namespace

void MomentReport::set_values(cplx empirical_value, cplx predicted_value) {
  empirical = empirical_value;
  predicted = predicted_value;
  abs_dev = std::abs(empirical - predicted);
  rel_dev = abs_dev / std::max(std::abs(predicted), 1e-300);
}

std::string MomentReport::to_json() const {
  std::ostringstream out;
  out << "{\"q\":" << q << ",\"kappa\":" << io::format_double(kappa)
      << ",\"alpha\":" << json_pair(shift.alpha)
      << ",\"beta\":" << json_pair(shift.beta)
      << ",\"empirical\":" << json_pair(empirical)
      << ",\"predicted\":" << json_pair(predicted)
      << ",\"rel_dev\":" << io::format_double(rel_dev) << ",\"method\":\""
      << json_escape(method) << "\",\"seed\":" << seed
      << ",\"versions\":{\"lml\":\"" << library_version << "\"}}\n";
  return out.str();
}

std::string to_string(PairMethod method) {
  switch (method) {
  case PairMethod::afe:
    return "afe";
  case PairMethod::hurwitz:
    return "hurwitz";
  case PairMethod::automatic:
    return "automatic";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

MomentContext::MomentContext(chars::CharacterTable table, MomentOptions options)
    : table_(std::move(table)), options_(options) {}

MomentContext::Key MomentContext::key_of(const special::WeightSpec &spec) {
  return {{spec.shift.alpha.real(), spec.shift.alpha.imag()},
          {spec.shift.beta.real(), spec.shift.beta.imag()}};
}

const chars::FamilyValues &
MomentContext::pair_values(const special::WeightSpec &spec, PairMethod *used) {
  const Key key = key_of(spec);
  auto it = pairs_.find(key);
  if (it == pairs_.end()) {
    PairMethod method = options_.method;
    if (method == PairMethod::automatic)
      method = chars::AfeKernel::required_products(q(), spec) <=
                       options_.max_products
                   ? PairMethod::afe
                   : PairMethod::hurwitz;
    auto values =
        method == PairMethod::afe
            ? chars::afe_pair_values(
                  table_, chars::AfeKernel(q(), spec, options_.max_products),
                  options_.workers)
            : chars::hurwitz_pair_values(table_, spec.shift, options_.workers);
    it = pairs_.emplace(key, std::move(values)).first;
    pair_methods_[key] = method;
  }
  if (used)
    *used = pair_methods_.at(key);
  return it->second;
}

const MomentContext::CongruenceBuckets &
MomentContext::congruence_buckets(const special::WeightSpec &spec) {
  const Key key = key_of(spec);
  if (auto it = buckets_.find(key); it != buckets_.end())
    return it->second;
  const std::uint64_t q = this->q();
  if (q > congruence_max_q)
    throw std::invalid_argument("congruence oracle limited to q <= " +
                                std::to_string(congruence_max_q));
  const chars::AfeKernel kernel(q, spec, options_.max_products);
  std::vector<std::uint64_t> inv(q, 0);
  for (std::uint64_t r = 1; r < q; ++r)
    inv[r] = arith::inverse_mod(r, q);

  CongruenceBuckets b;
  b.by_ratio.assign(q, cplx{});
  const std::uint64_t y = kernel.max_product();
  for (std::uint64_t m = 1; m <= y; ++m) {
    const std::uint64_t mr = m % q;
    const cplx pm = kernel.m_factor(m);
    std::uint64_t nr = 0;
    for (std::uint64_t n = 1; n <= y / m; ++n) {
      if (++nr == q)
        nr = 0;
      const cplx w = pm * kernel.product_weight(m * n);
      if (mr == 0 && nr == 0)
        b.both_divisible += w;
      else if (mr == 0 || nr == 0)
        b.one_divisible += w;
      else
        b.by_ratio[(mr * inv[nr]) % q] += w;
    }
  }
  for (const cplx &t : b.by_ratio)
    b.total += t;
  return buckets_.emplace(key, std::move(b)).first->second;
}

// ---------------------------------------------------------------------------

cplx empirical_moment(MomentContext &ctx, const arith::CoefficientVector &coeffs,
                      const special::WeightSpec &spec) {
  check_modulus(ctx.q(), coeffs);
  const auto &pairs = ctx.pair_values(spec);
  const auto poly = chars::dirichlet_poly_values(ctx.table(), coeffs);
  cplx acc{0.0, 0.0};
  for (std::size_t i = 0; i < pairs.size(); ++i)
    acc += pairs.values()[i] * std::norm(poly.values()[i]);
  return acc / static_cast<double>(arith::phi_plus(ctx.q()));
}

cplx empirical_moment(std::uint64_t q, const arith::CoefficientVector &coeffs,
                      const special::WeightSpec &spec,
                      const MomentOptions &options) {
  MomentContext ctx(chars::CharacterTable::build(q), options);
  return empirical_moment(ctx, coeffs, spec);
}

cplx congruence_moment(MomentContext &ctx, const arith::CoefficientVector &coeffs,
                       const special::WeightSpec &spec, bool include_multiples) {
  check_modulus(ctx.q(), coeffs);
  const auto &t = ctx.congruence_buckets(spec);
  const std::uint64_t q = ctx.q();
  const double half_phi = 0.5 * static_cast<double>(q - 1);
  cplx acc{0.0, 0.0};
  for (std::size_t a = 1; a <= coeffs.length(); ++a) {
    if (coeffs[a] == cplx{} || a % q == 0)
      continue;
    const std::uint64_t a_inv = arith::inverse_mod(a % q, q);
    for (std::size_t b = 1; b <= coeffs.length(); ++b) {
      if (coeffs[b] == cplx{} || b % q == 0)
        continue;
      const cplx c = coeffs[a] * std::conj(coeffs[b]) /
                     std::sqrt(static_cast<double>(a) * static_cast<double>(b));
      // a m = b n  <=>  m / n = b / a (mod q); the minus class is q - rho.
      const std::uint64_t rho = (b % q) * a_inv % q;
      cplx term = half_phi * (t.by_ratio[rho] + t.by_ratio[q - rho]) - t.total;
      if (include_multiples)
        term += static_cast<double>(q - 2) * t.both_divisible - t.one_divisible;
      acc += c * term;
    }
  }
  return acc / static_cast<double>(arith::phi_plus(q));
}

cplx congruence_moment(std::uint64_t q, const arith::CoefficientVector &coeffs,
                       const special::WeightSpec &spec, bool include_multiples) {
  if (q > congruence_max_q)
    throw std::invalid_argument("congruence oracle limited to q <= " +
                                std::to_string(congruence_max_q));
  MomentContext ctx(chars::CharacterTable::build(q));
  return congruence_moment(ctx, coeffs, spec, include_multiples);
}

// ---------------------------------------------------------------------------

cplx gamma_ratio(cplx alpha, cplx beta) {
  using special::log_gamma;
  return std::exp(log_gamma((0.5 - alpha) / 2.0) + log_gamma((0.5 - beta) / 2.0) -
                  log_gamma((0.5 + alpha) / 2.0) - log_gamma((0.5 + beta) / 2.0));
}

std::pair<cplx, cplx> coprime_double_sums(const arith::CoefficientVector &coeffs,
                                          cplx alpha, cplx beta) {
  const std::size_t L = coeffs.length();
  std::vector<double> logs(L + 1, 0.0);
  for (std::size_t i = 1; i <= L; ++i)
    logs[i] = std::log(static_cast<double>(i));
  cplx first{0.0, 0.0}, second{0.0, 0.0};
  for (std::size_t d = 1; d <= L; ++d) {
    const std::size_t top = L / d;
    for (std::size_t a = 1; a <= top; ++a) {
      const cplx ca = coeffs[d * a];
      if (ca == cplx{})
        continue;
      for (std::size_t b = 1; b <= top; ++b) {
        const cplx cb = coeffs[d * b];
        if (cb == cplx{} || std::gcd(a, b) != 1)
          continue;
        const cplx c = ca * std::conj(cb) / static_cast<double>(d);
        first += c * std::exp(-(1.0 + beta) * logs[a] - (1.0 + alpha) * logs[b]);
        second += c * std::exp(-(1.0 - alpha) * logs[a] - (1.0 - beta) * logs[b]);
      }
    }
  }
  return {first, second};
}

cplx twisted_main_term(std::uint64_t q, const special::ShiftPair &shift,
                       const arith::CoefficientVector &coeffs) {
  check_modulus(q, coeffs);
  const double logq = std::log(static_cast<double>(q));
  const cplx ab = shift.alpha + shift.beta;
  if (std::abs(ab) < 1e-4 / logq)
    throw std::invalid_argument(
        "alpha + beta too close to 0; use the central limit instead");
  const auto [s1, s2] = coprime_double_sums(coeffs, shift.alpha, shift.beta);
  const cplx scale = pow_real(static_cast<double>(q) / pi, -ab);
  return special::riemann_zeta(1.0 + ab) * s1 +
         scale * gamma_ratio(shift.alpha, shift.beta) *
             special::riemann_zeta(1.0 - ab) * s2;
}

CentralLimit central_main_term(std::uint64_t q,
                               const arith::CoefficientVector &coeffs) {
  constexpr int levels = 7;
  const double logq = std::log(static_cast<double>(q));
  std::vector<double> s(levels);
  std::vector<cplx> p(levels);
  for (int j = 0; j < levels; ++j) {
    s[j] = std::ldexp(0.1 / logq, -j);
    p[j] = twisted_main_term(q, special::ShiftPair{s[j], s[j], logq}, coeffs);
  }
  // Neville's scheme evaluated at s = 0; diag[k] uses the first k+1 nodes.
  std::vector<cplx> diag{p[0]};
  for (int k = 1; k < levels; ++k) {
    for (int i = levels - 1; i >= k; --i)
      p[i] = (s[i - k] * p[i] - s[i] * p[i - 1]) / (s[i - k] - s[i]);
    diag.push_back(p[k]);
  }
  std::vector<double> change;
  for (int k = 1; k < levels; ++k)
    change.push_back(std::abs(diag[k] - diag[k - 1]));
  // Rounding in the near-pole zeta values is amplified by the later columns;
  // keep the estimate where successive changes bottom out.
  std::size_t best = 0;
  for (std::size_t k = 1; k < change.size(); ++k)
    if (change[k] < change[best])
      best = k;
  for (std::size_t k = 1; k <= best; ++k)
    if (change[k] > change[k - 1])
      throw std::runtime_error("central extrapolation is not converging");
  if (change[best] > 1e-6 * std::max(1.0, std::abs(diag[best + 1])))
    throw std::runtime_error("central extrapolation is not converging");
  return {diag[best + 1], change[best]};
}

double central_unit_limit(std::uint64_t q) {
  return std::log(static_cast<double>(q) / pi) + 2.0 * euler_gamma +
         special::digamma(cplx{0.25, 0.0}).real();
}

// ---------------------------------------------------------------------------

namespace {

template <class Inner>
cplx diagonal_sum(const arith::CoefficientVector &coeffs, cplx alpha, cplx beta,
                  Inner inner) {
  const std::size_t L = coeffs.length();
  std::map<std::size_t, cplx> by_product;
  cplx acc{0.0, 0.0};
  for (std::size_t d = 1; d <= L; ++d) {
    const std::size_t top = L / d;
    for (std::size_t a = 1; a <= top; ++a) {
      const cplx ca = coeffs[d * a];
      if (ca == cplx{})
        continue;
      for (std::size_t b = 1; b <= top; ++b) {
        const cplx cb = coeffs[d * b];
        if (cb == cplx{} || std::gcd(a, b) != 1)
          continue;
        auto it = by_product.find(a * b);
        if (it == by_product.end())
          it = by_product.emplace(a * b, inner(a * b)).first;
        const cplx c = ca * std::conj(cb) / static_cast<double>(d) *
                       pow_real(static_cast<double>(a), -(1.0 + beta)) *
                       pow_real(static_cast<double>(b), -(1.0 + alpha));
        acc += c * it->second;
      }
    }
  }
  return acc;
}

} // namespace

cplx diagonal_term(std::uint64_t q, const arith::CoefficientVector &coeffs,
                   const special::WeightSpec &spec) {
  check_modulus(q, coeffs);
  spec.validate();
  const cplx alpha = spec.shift.alpha, beta = spec.shift.beta;
  if (alpha + beta == cplx{})
    throw std::invalid_argument("diagonal term needs alpha + beta != 0");
  const special::LineQuadrature line(spec.contour_cut, spec.quad_points);
  const std::size_t n = line.t.size();
  std::vector<cplx> s(n), base(n);
  for (std::size_t k = 0; k < n; ++k) {
    s[k] = cplx{spec.contour_sigma, line.t[k]};
    base[k] = line.w[k] / (2.0 * pi) *
              special::x_factor(s[k], special::Sign::plus, spec) *
              special::riemann_zeta(1.0 + alpha + beta + 2.0 * s[k]) / s[k];
  }
  const double qd = static_cast<double>(q);
  return diagonal_sum(coeffs, alpha, beta, [&](std::size_t ab) {
    const double lx = std::log(qd / (pi * static_cast<double>(ab)));
    cplx v{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k)
      v += base[k] * std::exp(s[k] * lx);
    return v;
  });
}

cplx diagonal_term_direct(std::uint64_t q, const arith::CoefficientVector &coeffs,
                          const special::WeightSpec &spec) {
  check_modulus(q, coeffs);
  spec.validate();
  const cplx alpha = spec.shift.alpha, beta = spec.shift.beta;
  const special::VWeight vplus(spec, special::Sign::plus);
  const double x_cut = vplus.decay_cutoff(spec.truncation_eps);
  const double qd = static_cast<double>(q);
  return diagonal_sum(coeffs, alpha, beta, [&](std::size_t ab) {
    cplx v{0.0, 0.0};
    for (std::uint64_t n = 1;; ++n) {
      const double nd = static_cast<double>(n);
      const double x = pi * static_cast<double>(ab) * nd * nd / qd;
      if (x > x_cut)
        break;
      v += pow_real(nd, -(1.0 + alpha + beta)) * vplus(x);
    }
    return v;
  });
}

// ---------------------------------------------------------------------------

std::vector<double> third_moment_terms(const chars::CharacterTable &table,
                                       unsigned workers) {
  const auto l = chars::family_l_values(table, cplx{0.5, 0.0}, workers);
  std::vector<double> out(l.size());
  for (std::size_t i = 0; i < l.size(); ++i)
    out[i] = std::pow(std::abs(l.values()[i]), 3);
  return out;
}

double third_moment(const chars::CharacterTable &table, unsigned workers) {
  const auto terms = third_moment_terms(table, workers);
  double acc = 0.0;
  for (double t : terms)
    acc += t;
  return acc / static_cast<double>(arith::phi_plus(table.q()));
}

UniformityInstance twisted_uniformity_instance(const chars::CharacterTable &table,
                                               double v, double t, double A,
                                               unsigned workers) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t q = table.q();
  const double logq = std::log(static_cast<double>(q));
  if (std::abs(t) > logq)
    throw std::invalid_argument("|t| must not exceed log q");
  const cplx s{0.5 + A / logq, t};
  const double exponent = 0.5 + 1.0 / 300.0;
  const auto x = static_cast<std::size_t>(
      std::floor(std::pow(static_cast<double>(q), exponent) * (1.0 + 1e-12)));
  const auto d = arith::dirichlet_sqrt_values(x);
  std::vector<cplx> c(x);
  for (std::size_t a = 1; a <= x; ++a)
    c[a - 1] = d[a - 1] * pow_real(static_cast<double>(a), -(s + cplx{0.0, v}));
  const auto poly = chars::family_twisted_sums(table, c);
  const auto l = chars::family_l_values(table, s, workers);
  double sum = 0.0;
  for (std::size_t i = 0; i < l.size(); ++i)
    sum += std::norm(l.values()[i]) * std::norm(poly.values()[i]);

  UniformityInstance out;
  const double phi = static_cast<double>(arith::phi_plus(q));
  const double bound = static_cast<double>(q) * std::pow(logq, 2.25);
  out.ratio = sum / bound;
  out.poly_length = x;
  auto &r = out.report;
  r.q = q;
  r.kappa = exponent;
  r.shift = special::ShiftPair{s - 0.5, std::conj(s) - 0.5, logq};
  r.method = "hurwitz-family;bound-shape";
  r.set_values(sum / phi, bound / phi);
  r.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                    .count();
  return out;
}

} // namespace lml::moment
