#include "lml/special.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lml::special {

namespace {

constexpr double pi = std::numbers::pi;
const cplx I{0.0, 1.0};

// B_{2k} for k = 1..12.
constexpr std::array<double, 12> bernoulli_even = {
    1.0 / 6.0,          -1.0 / 30.0,         1.0 / 42.0,
    -1.0 / 30.0,        5.0 / 66.0,          -691.0 / 2730.0,
    7.0 / 6.0,          -3617.0 / 510.0,     43867.0 / 798.0,
    -174611.0 / 330.0,  854513.0 / 138.0,    -236364091.0 / 2730.0};

bool is_nonpositive_integer(cplx s) {
  return s.imag() == 0.0 && s.real() <= 0.0 && s.real() == std::floor(s.real());
}

// log sin(pi z), stable for large |Im z|; defined modulo 2 pi i.
cplx log_sin_pi(cplx z) {
  if (std::abs(z.imag()) < 20.0)
    return std::log(std::sin(pi * z));
  if (z.imag() > 0.0)
    return -I * pi * z + std::log(1.0 - std::exp(2.0 * I * pi * z)) -
           std::log(2.0 * I) + I * pi;
  return I * pi * z + std::log(1.0 - std::exp(-2.0 * I * pi * z)) -
         std::log(2.0 * I);
}

} // namespace

cplx log_gamma(cplx z) {
  if (is_nonpositive_integer(z))
    throw std::domain_error("Gamma pole at nonpositive integer");
  if (z.real() < 0.5)
    return std::log(pi) - log_sin_pi(z) - log_gamma(1.0 - z);

  cplx shift_log{0.0, 0.0};
  while (std::abs(z) < 15.0 || z.real() < 8.0) {
    shift_log += std::log(z);
    z += 1.0;
  }
  const cplx inv = 1.0 / z;
  const cplx inv2 = inv * inv;
  cplx series{0.0, 0.0};
  cplx pw = inv;
  for (int k = 1; k <= 10; ++k) {
    series += bernoulli_even[k - 1] / (2.0 * k * (2.0 * k - 1.0)) * pw;
    pw *= inv2;
  }
  return (z - 0.5) * std::log(z) - z + 0.5 * std::log(2.0 * pi) + series -
         shift_log;
}

cplx complex_gamma(cplx s) {
  if (is_nonpositive_integer(s))
    throw std::domain_error("Gamma pole at nonpositive integer");
  if (s.imag() == 0.0 && s.real() > 0.0 && s.real() < 170.0)
    return std::tgamma(s.real());
  return std::exp(log_gamma(s));
}

cplx digamma(cplx z) {
  if (is_nonpositive_integer(z))
    throw std::domain_error("digamma pole at nonpositive integer");
  if (z.real() < 0.5)
    return digamma(1.0 - z) - pi / std::tan(pi * z);
  cplx acc{0.0, 0.0};
  while (std::abs(z) < 15.0 || z.real() < 8.0) {
    acc -= 1.0 / z;
    z += 1.0;
  }
  const cplx inv2 = 1.0 / (z * z);
  cplx series{0.0, 0.0};
  cplx pw = inv2;
  for (int k = 1; k <= 10; ++k) {
    series += bernoulli_even[k - 1] / (2.0 * k) * pw;
    pw *= inv2;
  }
  return acc + std::log(z) - 0.5 / z - series;
}

cplx hurwitz_zeta(cplx s, double a, const HurwitzOptions &opt) {
  if (s == cplx{1.0, 0.0})
    throw std::domain_error("hurwitz_zeta: pole at s = 1");
  if (!(a > 0.0))
    throw std::invalid_argument("hurwitz_zeta: a must be positive");
  if (opt.bernoulli_terms < 1 ||
      opt.bernoulli_terms > static_cast<int>(bernoulli_even.size()))
    throw std::invalid_argument("hurwitz_zeta: bernoulli_terms in [1, 12]");

  const int n = opt.shift_terms + static_cast<int>(std::ceil(std::abs(s.imag())));
  cplx sum{0.0, 0.0};
  for (int k = 0; k < n; ++k)
    sum += std::exp(-s * std::log(k + a));

  const double w = n + a;
  const double logw = std::log(w);
  const cplx w_ms = std::exp(-s * logw);
  sum += w * w_ms / (s - 1.0) + 0.5 * w_ms;

  cplx term = s * w_ms / w;
  double fact = 2.0; // (2j)!
  for (int j = 1; j <= opt.bernoulli_terms; ++j) {
    sum += bernoulli_even[j - 1] / fact * term;
    term *= (s + (2.0 * j - 1.0)) * (s + 2.0 * j) / (w * w);
    fact *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
  }
  return sum;
}

cplx riemann_zeta(cplx s) { return hurwitz_zeta(s, 1.0); }

// ---------------------------------------------------------------------------

ShiftPair ShiftPair::make(cplx alpha, cplx beta, std::uint64_t q) {
  const double logq = std::log(static_cast<double>(q));
  for (cplx z : {alpha, beta}) {
    if (std::abs(z.real()) > 10.0 / logq + 1e-15)
      throw std::invalid_argument("shift real part exceeds 10/log q");
    if (std::abs(z.imag()) > 10.0 * logq)
      throw std::invalid_argument("shift imaginary part exceeds 10 log q");
  }
  return {alpha, beta, logq};
}

ShiftPair ShiftPair::inverse_log(std::uint64_t q) {
  const double s = 1.0 / std::log(static_cast<double>(q));
  return make(s, s, q);
}

double ShiftPair::height() const {
  return std::max({1.0, std::abs(alpha.imag()), std::abs(beta.imag())});
}

std::string to_string(GMode mode) {
  return mode == GMode::gaussian ? "gaussian" : "pinned";
}

cplx g_function(cplx s, const WeightSpec &spec) {
  const cplx gauss = std::exp(s * s);
  if (spec.g_mode == GMode::gaussian)
    return gauss;
  const cplx c = 0.5 * (spec.shift.alpha + spec.shift.beta);
  return (c * c - s * s) / (c * c) * gauss;
}

cplx x_factor(cplx s, Sign sign, const WeightSpec &spec) {
  const cplx a = spec.shift.alpha, b = spec.shift.beta;
  const double sg = sign == Sign::plus ? 1.0 : -1.0;
  const cplx num_a = 0.5 * (0.5 + sg * a + s), num_b = 0.5 * (0.5 + sg * b + s);
  if (is_nonpositive_integer(num_a) || is_nonpositive_integer(num_b))
    throw std::domain_error("x_factor: Gamma pole");
  const cplx log_ratio = log_gamma(num_a) + log_gamma(num_b) -
                         log_gamma(0.5 * (0.5 + a)) - log_gamma(0.5 * (0.5 + b));
  return g_function(s, spec) * std::exp(log_ratio);
}

void WeightSpec::validate() const {
  if (!(contour_sigma > 0.0))
    throw std::invalid_argument("contour_sigma must be positive");
  if (!(contour_cut > 0.0))
    throw std::invalid_argument("contour_cut must be positive");
  if (quad_points < 4)
    throw std::invalid_argument("quad_points must be at least 4");
  if (g_mode == GMode::pinned && std::abs(shift.alpha + shift.beta) == 0.0)
    throw std::invalid_argument("pinned G requires alpha + beta != 0");
  // Truncating at |Im s| = cut must leave a negligible tail.
  for (Sign sg : {Sign::plus, Sign::minus}) {
    const double edge = std::abs(x_factor({contour_sigma, contour_cut}, sg, *this));
    const double centre = std::abs(x_factor({contour_sigma, 0.0}, sg, *this));
    if (!(edge <= 1e-14 * centre))
      throw std::invalid_argument(
          "contour_cut too small: integrand has not decayed at the cut");
  }
}

// ---------------------------------------------------------------------------

void gauss_legendre(int n, std::vector<double> &x, std::vector<double> &w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1)
        p0 = 1.0;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
        break;
    }
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

LineQuadrature::LineQuadrature(double cut, int nodes_per_unit) {
  std::vector<double> gx, gw;
  gauss_legendre(nodes_per_unit, gx, gw);
  const int panels = static_cast<int>(std::ceil(2.0 * cut - 1e-9));
  const double len = 2.0 * cut / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = -cut + (p + 0.5) * len;
    for (int k = 0; k < nodes_per_unit; ++k) {
      t.push_back(mid + 0.5 * len * gx[k]);
      w.push_back(0.5 * len * gw[k]);
    }
  }
}

VWeight::VWeight(const WeightSpec &spec, Sign sign) : spec_(spec), sign_(sign) {
  spec_.validate();
  const LineQuadrature quad(spec.contour_cut, spec.quad_points);
  nodes_.reserve(quad.t.size());
  factors_.reserve(quad.t.size());
  for (std::size_t k = 0; k < quad.t.size(); ++k) {
    const cplx s{spec.contour_sigma, quad.t[k]};
    nodes_.push_back(s);
    factors_.push_back(quad.w[k] * x_factor(s, sign, spec) / (2.0 * pi * s));
  }
  // rightmost Gamma poles sit at s = -1/2 -+ alpha, -1/2 -+ beta
  const double sg = sign == Sign::plus ? 1.0 : -1.0;
  const double pole = std::max(-0.5 - sg * spec.shift.alpha.real(),
                               -0.5 - sg * spec.shift.beta.real());
  if (pole < -0.1) {
    const double sigma = 0.5 * pole;
    residue_ = x_factor(0.0, sign, spec);
    for (std::size_t k = 0; k < quad.t.size(); ++k) {
      const cplx s{sigma, quad.t[k]};
      left_nodes_.push_back(s);
      left_factors_.push_back(quad.w[k] * x_factor(s, sign, spec) / (2.0 * pi * s));
    }
  }
}

cplx VWeight::operator()(double x) const {
  if (!(x > 0.0))
    throw std::invalid_argument("v_weight: x must be positive");
  const double lx = std::log(x);
  const bool left = x < 1.0 && !left_nodes_.empty();
  const auto &nodes = left ? left_nodes_ : nodes_;
  const auto &factors = left ? left_factors_ : factors_;
  cplx acc = left ? residue_ : cplx{};
  for (std::size_t k = 0; k < nodes.size(); ++k)
    acc += factors[k] * std::exp(-nodes[k] * lx);
  return acc;
}

cplx VWeight::log_derivative(double x) const {
  if (!(x > 0.0))
    throw std::invalid_argument("v_weight: x must be positive");
  const double lx = std::log(x);
  const bool left = x < 1.0 && !left_nodes_.empty();
  const auto &nodes = left ? left_nodes_ : nodes_;
  const auto &factors = left ? left_factors_ : factors_;
  cplx acc{0.0, 0.0};
  for (std::size_t k = 0; k < nodes.size(); ++k)
    acc -= factors[k] * nodes[k] * std::exp(-nodes[k] * lx);
  return acc;
}

double VWeight::decay_cutoff(double eps) const {
  const LineQuadrature quad(spec_.contour_cut, spec_.quad_points);
  double best = std::numeric_limits<double>::infinity();
  for (double sigma = 0.5; sigma <= 24.0; sigma += 0.5) {
    double k_sigma = 0.0;
    for (std::size_t k = 0; k < quad.t.size(); ++k) {
      const cplx s{sigma, quad.t[k]};
      k_sigma += quad.w[k] * std::abs(x_factor(s, sign_, spec_)) / std::abs(s);
    }
    k_sigma /= 2.0 * pi;
    best = std::min(best, std::exp((std::log(k_sigma) - std::log(eps)) / sigma));
  }
  return best;
}

cplx v_weight(double x, Sign sign, const WeightSpec &spec) {
  return VWeight(spec, sign)(x);
}

// ---------------------------------------------------------------------------

VInterpolator::VInterpolator(const VWeight &v, double x_lo, double x_hi)
    : u0_(std::log(x_lo)), h_(std::log1p(0x1p-7)) {
  if (!(x_lo > 0.0 && x_hi > x_lo))
    throw std::invalid_argument("VInterpolator: bad range");
  const auto n = static_cast<std::size_t>(std::ceil((std::log(x_hi) - u0_) / h_)) + 2;
  values_.resize(n);
  slopes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::exp(u0_ + static_cast<double>(i) * h_);
    values_[i] = v(x);
    slopes_[i] = h_ * v.log_derivative(x);
  }
}

cplx VInterpolator::at_log(double log_x) const {
  const double pos = (log_x - u0_) / h_;
  if (pos <= 0.0)
    return values_.front();
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= values_.size())
    return {0.0, 0.0};
  const double t = pos - static_cast<double>(i);
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * values_[i] + (t3 - 2 * t2 + t) * slopes_[i] +
         (-2 * t3 + 3 * t2) * values_[i + 1] + (t3 - t2) * slopes_[i + 1];
}

cplx VInterpolator::operator()(double x) const { return at_log(std::log(x)); }

double VInterpolator::x_lo() const { return std::exp(u0_); }
double VInterpolator::x_hi() const {
  return std::exp(u0_ + h_ * static_cast<double>(values_.size() - 1));
}

} // namespace lml::special
