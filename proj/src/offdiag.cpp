#include "lml/offdiag.hpp"

#include "lml/fft.hpp"
#include "lml/io.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lml::offdiag {

namespace {

double integrate(const std::function<double(double)> &f, double lo, double hi) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, lo, hi, 15, 1e-12);
}

// Neumaier summation for one real component.
struct CompensatedSum {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct CompensatedComplex {
  CompensatedSum re, im;
  void add(cplx z) {
    re.add(z.real());
    im.add(z.imag());
  }
  cplx value() const { return {re.value(), im.value()}; }
};

std::size_t first_above(double x) {
  return static_cast<std::size_t>(std::floor(x)) + 1;
}

std::size_t last_below(double x) {
  return static_cast<std::size_t>(std::ceil(x)) - 1;
}

void check_budget(const DyadicBox &box) {
  if (box.A * box.M > enumeration_budget || box.B * box.N > enumeration_budget)
    throw std::length_error("box exceeds the enumeration budget (AM, BN <= 1e8)");
}

} // namespace

double smoothstep5(double t) {
  if (t <= 0.0)
    return 0.0;
  if (t >= 1.0)
    return 1.0;
  return t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double Bump::operator()(double u) const {
  if (u <= 1.0 || u >= 2.0)
    return 0.0;
  const double t = 2.0 * std::log2(u);
  return t <= 1.0 ? smoothstep5(t) : 1.0 - smoothstep5(t - 1.0);
}

double Bump::mass() {
  static const double value = [] {
    const Bump w;
    auto f = [&](double u) { return w(u); };
    return integrate(f, 1.0, kink()) + integrate(f, kink(), 2.0);
  }();
  return value;
}

std::vector<PartitionBlock> dyadic_partition(double range_max) {
  if (!(range_max >= 1.0))
    throw std::invalid_argument("dyadic_partition: range_max must be >= 1");
  const int top = static_cast<int>(std::floor(2.0 * std::log2(range_max) + 1e-12));
  std::vector<PartitionBlock> out;
  for (int k = -1; k <= top; ++k)
    out.push_back({k, std::exp2(0.5 * k)});
  return out;
}

double partition_sum(const std::vector<PartitionBlock> &blocks, double x) {
  const Bump w;
  double s = 0.0;
  for (const auto &b : blocks)
    s += w(x / b.M);
  return s;
}

// ---------------------------------------------------------------------------

std::size_t DyadicBox::a_first() const { return static_cast<std::size_t>(std::ceil(A)); }
std::size_t DyadicBox::a_last() const { return static_cast<std::size_t>(std::ceil(2.0 * A)) - 1; }
std::size_t DyadicBox::b_first() const { return static_cast<std::size_t>(std::ceil(B)); }
std::size_t DyadicBox::b_last() const { return static_cast<std::size_t>(std::ceil(2.0 * B)) - 1; }

double DyadicBox::normalizer() const { return 1.0 / std::sqrt(A * B * M * N); }

bool DyadicBox::balanced() const {
  const double x = A * M, y = B * N;
  return std::max(x, y) <= 4.0 * std::min(x, y);
}

void DyadicBox::validate() const {
  if (!arith::is_prime(q))
    throw std::invalid_argument("box modulus must be prime");
  if (!(A >= 1.0 && B >= 1.0 && M >= 1.0 && N >= 1.0))
    throw std::invalid_argument("box scales must be >= 1");
  if (a_last() < a_first() || b_last() < b_first())
    throw std::invalid_argument("box index range is empty");
}

RangeCoeffs RangeCoeffs::ones(std::size_t first, std::size_t last) {
  return {first, std::vector<cplx>(last - first + 1, cplx{1.0, 0.0})};
}

RangeCoeffs RangeCoeffs::unit_disk(std::size_t first, std::size_t last,
                                   std::uint64_t seed) {
  return {first, arith::unit_disk_samples(last - first + 1, seed)};
}

// ---------------------------------------------------------------------------

cplx offdiag_bruteforce(const DyadicBox &box, const RangeCoeffs &alpha,
                        const RangeCoeffs &beta, CongruenceSign sign) {
  box.validate();
  check_budget(box);
  const Bump w;
  const std::uint64_t q = box.q;
  const std::size_t m0 = first_above(box.M), m1 = last_below(2.0 * box.M);
  const std::size_t n0 = first_above(box.N), n1 = last_below(2.0 * box.N);
  cplx acc{0.0, 0.0};
  for (std::size_t a = box.a_first(); a <= box.a_last(); ++a) {
    const cplx ca = alpha.at(a);
    if (ca == cplx{})
      continue;
    for (std::size_t b = box.b_first(); b <= box.b_last(); ++b) {
      const cplx cb = beta.at(b);
      if (cb == cplx{})
        continue;
      const bool b_unit = b % q != 0;
      const std::uint64_t b_inv = b_unit ? arith::inverse_mod(b % q, q) : 0;
      double inner = 0.0;
      for (std::size_t m = m0; m <= m1; ++m) {
        const double w1 = w(static_cast<double>(m) / box.M);
        if (w1 == 0.0)
          continue;
        std::uint64_t target = (a % q) * (m % q) % q;
        if (sign == CongruenceSign::minus)
          target = (q - target) % q;
        // b n = target (mod q)
        std::size_t start = n0, step = 1;
        if (b_unit) {
          const std::uint64_t c = arith::mul_mod(target, b_inv, q);
          start = n0 + (c + q - n0 % q) % q;
          step = q;
        } else if (target != 0) {
          continue;
        }
        for (std::size_t n = start; n <= n1; n += step) {
          if (a * m == b * n)
            continue;
          inner += w1 * w(static_cast<double>(n) / box.N);
        }
      }
      acc += ca * cb * inner;
    }
  }
  return acc * box.normalizer();
}

cplx offdiag_bruteforce_by_m(const DyadicBox &box, const RangeCoeffs &alpha,
                             const RangeCoeffs &beta, CongruenceSign sign) {
  box.validate();
  check_budget(box);
  const Bump w;
  const std::uint64_t q = box.q;
  const std::size_t m0 = first_above(box.M), m1 = last_below(2.0 * box.M);
  const std::size_t n0 = first_above(box.N), n1 = last_below(2.0 * box.N);
  cplx acc{0.0, 0.0};
  for (std::size_t b = box.b_first(); b <= box.b_last(); ++b) {
    const cplx cb = beta.at(b);
    if (cb == cplx{})
      continue;
    for (std::size_t a = box.a_first(); a <= box.a_last(); ++a) {
      const cplx ca = alpha.at(a);
      if (ca == cplx{})
        continue;
      const bool a_unit = a % q != 0;
      const std::uint64_t a_inv = a_unit ? arith::inverse_mod(a % q, q) : 0;
      double inner = 0.0;
      for (std::size_t n = n0; n <= n1; ++n) {
        const double w2 = w(static_cast<double>(n) / box.N);
        if (w2 == 0.0)
          continue;
        std::uint64_t target = (b % q) * (n % q) % q;
        if (sign == CongruenceSign::minus)
          target = (q - target) % q;
        std::size_t start = m0, step = 1;
        if (a_unit) {
          const std::uint64_t c = arith::mul_mod(target, a_inv, q);
          start = m0 + (c + q - m0 % q) % q;
          step = q;
        } else if (target != 0) {
          continue;
        }
        for (std::size_t m = start; m <= m1; m += step) {
          if (a * m == b * n)
            continue;
          inner += w2 * w(static_cast<double>(m) / box.M);
        }
      }
      acc += cb * ca * inner;
    }
  }
  return acc * box.normalizer();
}

// ---------------------------------------------------------------------------

RRange m1_r_range(const DyadicBox &box, std::uint64_t a, std::uint64_t b,
                  CongruenceSign sign) {
  const double q = static_cast<double>(box.q);
  const double am = static_cast<double>(a) * box.M;
  const double bn = static_cast<double>(b) * box.N;
  // q r = a b x -+ b n with b x in [M, 2M] and n in [N, 2N].
  const double lo = sign == CongruenceSign::plus ? am - 2.0 * bn : am + bn;
  const double hi = sign == CongruenceSign::plus ? 2.0 * am - bn : 2.0 * am + 2.0 * bn;
  return {static_cast<long long>(std::ceil(lo / q)),
          static_cast<long long>(std::floor(hi / q))};
}

double m1_integral(const DyadicBox &box, std::uint64_t a, std::uint64_t b,
                   long long r, CongruenceSign sign) {
  const double q = static_cast<double>(box.q);
  const double ad = static_cast<double>(a), bd = static_cast<double>(b);
  const double ab = ad * bd, qr = q * static_cast<double>(r);
  const double bN = bd * box.N;
  const double s = sign == CongruenceSign::plus ? 1.0 : -1.0;
  // u2(x) = s (a b x - q r) / (b N) in [1, 2]
  const double x2a = (qr + s * bN) / ab, x2b = (qr + s * 2.0 * bN) / ab;
  const double lo = std::max(box.M / bd, std::min(x2a, x2b));
  const double hi = std::min(2.0 * box.M / bd, std::max(x2a, x2b));
  if (!(hi > lo))
    return 0.0;
  const Bump w;
  auto f = [&](double x) {
    return w(bd * x / box.M) * w(s * (ab * x - qr) / bN);
  };
  std::vector<double> cuts{lo};
  for (double c : {Bump::kink() * box.M / bd, (qr + s * Bump::kink() * bN) / ab})
    if (c > lo && c < hi)
      cuts.push_back(c);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += integrate(f, cuts[i], cuts[i + 1]);
  return total;
}

cplx secondary_main_m1(const DyadicBox &box, const RangeCoeffs &alpha,
                       const RangeCoeffs &beta, CongruenceSign sign,
                       long long extra_r) {
  box.validate();
  check_budget(box);
  cplx acc{0.0, 0.0};
  for (std::size_t ia = box.a_first(); ia <= box.a_last(); ++ia) {
    const cplx ca = alpha.at(ia);
    if (ca == cplx{})
      continue;
    for (std::size_t ib = box.b_first(); ib <= box.b_last(); ++ib) {
      const cplx cb = beta.at(ib);
      if (cb == cplx{})
        continue;
      const std::size_t d = std::gcd(ia, ib);
      const std::uint64_t a = ia / d, b = ib / d;
      const RRange rr = m1_r_range(box, a, b, sign);
      double inner = 0.0;
      for (long long r = rr.lo - extra_r; r <= rr.hi + extra_r; ++r)
        if (r != 0)
          inner += m1_integral(box, a, b, r, sign);
      acc += ca * cb * inner;
    }
  }
  return acc * box.normalizer();
}

cplx secondary_main_m2(const DyadicBox &box, const RangeCoeffs &alpha,
                       const RangeCoeffs &beta) {
  box.validate();
  const Bump w;
  cplx sa{0.0, 0.0}, sb{0.0, 0.0};
  for (std::size_t a = box.a_first(); a <= box.a_last(); ++a)
    sa += alpha.at(a);
  for (std::size_t b = box.b_first(); b <= box.b_last(); ++b)
    sb += beta.at(b);
  double wm = 0.0;
  for (std::size_t m = first_above(box.M); m <= last_below(2.0 * box.M); ++m)
    wm += w(static_cast<double>(m) / box.M);
  return 2.0 * box.normalizer() * sa * sb * wm *
         (box.N / static_cast<double>(box.q)) * Bump::mass();
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t nonzero_count(long long lo, long long hi) {
  if (hi < lo)
    return 0;
  const auto n = static_cast<std::uint64_t>(hi - lo + 1);
  return lo <= 0 && hi >= 0 ? n - 1 : n;
}

std::uint64_t coprime_pairs(const BilinearPhaseSum &s) {
  std::uint64_t n = 0;
  for (std::size_t a = s.alpha.first; a <= s.alpha.last(); ++a)
    for (std::size_t b = s.beta.first; b <= s.beta.last(); ++b)
      n += std::gcd(a, b) == 1;
  return n;
}

} // namespace

std::uint64_t phase_sum_terms(const BilinearPhaseSum &spec) {
  return coprime_pairs(spec) * nonzero_count(spec.r_min, spec.r_max) *
         nonzero_count(spec.g_min, spec.g_max);
}

BilinearPhaseSum kloosterman_fraction_sum(BilinearPhaseSum s) {
  if (s.alpha.values.empty() || s.beta.values.empty() || s.alpha.first == 0 ||
      s.beta.first == 0)
    throw std::invalid_argument("phase sum needs nonempty positive index ranges");
  const std::uint64_t nr = nonzero_count(s.r_min, s.r_max);
  const std::uint64_t ng = nonzero_count(s.g_min, s.g_max);
  const std::uint64_t rg = nr * ng;
  if (static_cast<double>(s.alpha.values.size()) *
          static_cast<double>(s.beta.values.size()) * static_cast<double>(rg) >
      1e12)
    throw std::length_error("phase sum exceeds the term budget");
  s.terms = phase_sum_terms(s);
  if (s.terms > phase_sum_budget)
    throw std::length_error("phase sum has " + std::to_string(s.terms) +
                            " terms, budget is " +
                            std::to_string(phase_sum_budget));

  std::vector<long long> products;
  products.reserve(rg);
  for (long long r = s.r_min; r <= s.r_max; ++r)
    for (long long g = s.g_min; g <= s.g_max; ++g)
      if (r != 0 && g != 0)
        products.push_back(r * g);

  CompensatedComplex acc;
  CompensatedSum bound;
  std::vector<cplx> roots;
  std::vector<double> hist;
  for (std::size_t b = s.beta.first; b <= s.beta.last(); ++b) {
    const cplx cb = s.beta.at(b);
    const auto bb = static_cast<long long>(b);
    roots.resize(b);
    for (std::size_t j = 0; j < b; ++j)
      roots[j] = unit_root(-static_cast<long long>(j), bb);
    const bool use_hist = products.size() > b;
    if (use_hist) {
      hist.assign(b, 0.0);
      for (long long p : products)
        hist[static_cast<std::size_t>(((p % bb) + bb) % bb)] += 1.0;
    }
    const std::uint64_t q_mod = s.q % b;
    for (std::size_t a = s.alpha.first; a <= s.alpha.last(); ++a) {
      if (std::gcd(a, b) != 1)
        continue;
      const cplx c = s.alpha.at(a) * cb;
      bound.add(std::abs(s.alpha.at(a)) * std::abs(cb) * static_cast<double>(rg));
      if (c == cplx{})
        continue;
      const std::uint64_t a_inv = b == 1 ? 0 : arith::inverse_mod(a % b, b);
      const std::uint64_t k = b == 1 ? 0 : arith::mul_mod(q_mod, a_inv, b);
      cplx inner{0.0, 0.0};
      if (use_hist) {
        for (std::size_t j = 0; j < b; ++j)
          if (hist[j] != 0.0)
            inner += hist[j] * roots[arith::mul_mod(k, j, b)];
      } else {
        for (long long p : products) {
          const auto pm = static_cast<std::uint64_t>(((p % bb) + bb) % bb);
          inner += roots[arith::mul_mod(k, pm, b)];
        }
      }
      acc.add(c * inner);
    }
  }
  s.value = acc.value();
  s.trivial_bound = bound.value();
  s.ratio = s.trivial_bound > 0.0 ? std::abs(s.value) / s.trivial_bound : 0.0;
  return s;
}

ExponentFit fit_cancellation_exponent(std::uint64_t q,
                                      const std::vector<int> &exponents) {
  ExponentFit fit;
  std::vector<double> xs, ys;
  for (int e : exponents) {
    const auto A = static_cast<std::size_t>(1) << e;
    BilinearPhaseSum s;
    s.q = q;
    s.alpha = RangeCoeffs::ones(A, 2 * A - 1);
    s.beta = RangeCoeffs::ones(A, 2 * A - 1);
    s = kloosterman_fraction_sum(std::move(s));
    fit.scales.push_back(static_cast<double>(A));
    fit.ratios.push_back(s.ratio);
    xs.push_back(std::log(static_cast<double>(A) * static_cast<double>(A)));
    ys.push_back(std::log(s.ratio));
  }
  if (xs.size() < 2)
    throw std::invalid_argument("exponent fit needs at least two scales");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  fit.delta = -sxy / sxx;
  fit.log_constant = my + fit.delta * mx;
  return fit;
}

// ---------------------------------------------------------------------------

RegimeFilter parse_regime(const std::string &s) {
  if (s == "all")
    return RegimeFilter::all;
  if (s == "balanced")
    return RegimeFilter::balanced;
  if (s == "unbalanced")
    return RegimeFilter::unbalanced;
  throw std::invalid_argument("regime must be all, balanced or unbalanced");
}

void phase_ranges(const DyadicBox &box, long long &R, long long &G) {
  const double q = static_cast<double>(box.q);
  const double span = box.A * box.M + box.B * box.N;
  R = std::max(1LL, static_cast<long long>(std::floor(span / q)));
  G = std::max(1LL, static_cast<long long>(std::ceil(span / (box.M * box.N))));
  const double pairs = static_cast<double>(box.a_last() - box.a_first() + 1) *
                       static_cast<double>(box.b_last() - box.b_first() + 1);
  while (pairs * 4.0 * static_cast<double>(R) * static_cast<double>(G) >
             static_cast<double>(phase_sum_budget) &&
         (R > 1 || G > 1)) {
    if (G > 1)
      G = std::max(1LL, G / 2);
    else
      R = std::max(1LL, R / 2);
  }
}

std::vector<DyadicBox> standard_grid() {
  std::vector<DyadicBox> boxes;
  for (double A : {1.0, 2.0, 4.0})
    for (double B : {1.0, 2.0, 4.0})
      for (double M : {64.0, 256.0, 1024.0})
        for (double N : {64.0, 256.0, 1024.0})
          boxes.push_back({0, A, B, M, N});
  return boxes;
}

std::vector<SweepRow> cancellation_sweep(const SweepConfig &config) {
  std::vector<SweepRow> rows;
  for (DyadicBox box : config.boxes) {
    box.q = config.q;
    box.validate();
    const bool balanced = box.balanced();
    if ((config.regime == RegimeFilter::balanced && !balanced) ||
        (config.regime == RegimeFilter::unbalanced && balanced))
      continue;
    RangeCoeffs alpha, beta;
    if (config.unit_coefficients) {
      alpha = RangeCoeffs::ones(box.a_first(), box.a_last());
      beta = RangeCoeffs::ones(box.b_first(), box.b_last());
    } else {
      alpha = RangeCoeffs::unit_disk(box.a_first(), box.a_last(), 2 * config.seed);
      beta = RangeCoeffs::unit_disk(box.b_first(), box.b_last(), 2 * config.seed + 1);
    }
    SweepRow row;
    row.box = box;
    row.balanced = balanced;
    row.seed = config.seed;
    row.S = offdiag_bruteforce(box, alpha, beta, CongruenceSign::plus) +
            offdiag_bruteforce(box, alpha, beta, CongruenceSign::minus);
    row.m1_plus = secondary_main_m1(box, alpha, beta, CongruenceSign::plus);
    row.m1_minus = secondary_main_m1(box, alpha, beta, CongruenceSign::minus);
    row.m2 = secondary_main_m2(box, alpha, beta);
    long long R = 1, G = 1;
    phase_ranges(box, R, G);
    BilinearPhaseSum ps;
    ps.q = box.q;
    ps.r_min = -R;
    ps.r_max = R;
    ps.g_min = -G;
    ps.g_max = G;
    ps.alpha = alpha;
    ps.beta = beta;
    ps = kloosterman_fraction_sum(std::move(ps));
    row.klo_ratio = ps.ratio;
    row.klo_terms = ps.terms;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow> &rows) {
  using io::format_double;
  std::ostringstream out;
  out << sweep_header << '\n';
  for (const auto &r : rows) {
    out << r.box.q << ',' << format_double(r.box.A) << ','
        << format_double(r.box.B) << ',' << format_double(r.box.M) << ','
        << format_double(r.box.N) << ','
        << (r.balanced ? "balanced" : "unbalanced");
    for (cplx z : {r.S, r.m1_plus, r.m1_minus, r.m2})
      out << ',' << format_double(z.real()) << ',' << format_double(z.imag());
    out << ',' << format_double(r.klo_ratio) << ',' << r.seed << '\n';
  }
  return out.str();
}

void write_sweep_csv(const std::filesystem::path &path,
                     const std::vector<SweepRow> &rows) {
  const std::string text = sweep_csv(rows);
  io::write_atomically(path, [&](std::ostream &out) { out << text; });
}

} // namespace lml::offdiag
