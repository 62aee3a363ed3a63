#include "lml/characters.hpp"

#include "lml/io.hpp"
#include "lml/parallel.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <stdexcept>

namespace lml::chars {

namespace {

constexpr double pi = std::numbers::pi;
constexpr char cache_magic[4] = {'L', 'M', 'L', '1'};

void put_u64(std::vector<unsigned char> &buf, std::uint64_t v) {
  for (int i = 0; i < 8; ++i)
    buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u32(std::vector<unsigned char> &buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i)
    buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_u64(std::span<const unsigned char> buf, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(buf[at + i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::span<const unsigned char> buf, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(buf[at + i]) << (8 * i);
  return v;
}

std::vector<std::uint32_t> build_dlog(const arith::PrimeModulus &modulus) {
  const std::uint64_t q = modulus.q(), g = modulus.generator();
  std::vector<std::uint32_t> dlog(q, 0);
  std::vector<bool> seen(q, false);
  std::uint64_t x = 1;
  for (std::uint64_t k = 0; k + 1 < q; ++k) {
    if (x == 0 || seen[x])
      throw std::logic_error("generator does not generate (Z/qZ)^*");
    seen[x] = true;
    dlog[x] = static_cast<std::uint32_t>(k);
    x = arith::mul_mod(x, g, q);
  }
  return dlog;
}

} // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

CharacterTable::CharacterTable(const arith::PrimeModulus &modulus)
    : modulus_(modulus), dlog_(build_dlog(modulus)),
      half_dft_(std::make_shared<Dft>((modulus.q() - 1) / 2)) {}

CharacterTable::CharacterTable(const arith::PrimeModulus &modulus,
                               std::vector<std::uint32_t> dlog)
    : modulus_(modulus), dlog_(std::move(dlog)),
      half_dft_(std::make_shared<Dft>((modulus.q() - 1) / 2)) {
  if (dlog_ != build_dlog(modulus_))
    throw std::invalid_argument("dlog table does not match the generator");
}

CharacterTable CharacterTable::build(std::uint64_t q) {
  return CharacterTable(arith::PrimeModulus(q));
}

std::uint32_t CharacterTable::dlog(std::uint64_t n) const {
  const std::uint64_t r = n % q();
  if (r == 0)
    throw std::invalid_argument("dlog of a multiple of q");
  return dlog_[r];
}

std::vector<std::uint64_t> CharacterTable::even_primitive_indices() const {
  std::vector<std::uint64_t> out;
  for (std::uint64_t j = 2; j + 1 < order(); j += 2)
    out.push_back(j);
  return out;
}

cplx CharacterTable::chi(std::uint64_t j, std::uint64_t n) const {
  if (n % q() == 0)
    return {0.0, 0.0};
  const auto ord = static_cast<long long>(order());
  const auto k = static_cast<long long>(arith::mul_mod(j % order(), dlog(n), order()));
  return unit_root(k, ord);
}

void CharacterTable::save(const std::filesystem::path &path) const {
  std::vector<unsigned char> buf(std::begin(cache_magic), std::end(cache_magic));
  put_u64(buf, q());
  put_u64(buf, generator());
  for (std::uint64_t n = 1; n < q(); ++n)
    put_u32(buf, dlog_[n]);
  put_u64(buf, fnv1a64(buf));
  io::write_atomically(
      path,
      [&](std::ostream &out) {
        out.write(reinterpret_cast<const char *>(buf.data()),
                  static_cast<std::streamsize>(buf.size()));
      },
      true);
}

CharacterTable CharacterTable::load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open character cache " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  if (buf.size() < 4 + 8 + 8 + 8 ||
      !std::equal(std::begin(cache_magic), std::end(cache_magic), buf.begin()))
    throw std::runtime_error("character cache: bad magic or truncated file");
  const std::span<const unsigned char> bytes(buf);
  const std::uint64_t q = get_u64(bytes, 4);
  const std::uint64_t g = get_u64(bytes, 12);
  if (q < 5 || buf.size() != 4 + 8 + 8 + 4 * (q - 1) + 8)
    throw std::runtime_error("character cache: size does not match q");
  const std::size_t body = buf.size() - 8;
  if (fnv1a64(bytes.first(body)) != get_u64(bytes, body))
    throw std::runtime_error("character cache: digest mismatch");
  std::vector<std::uint32_t> dlog(q, 0);
  for (std::uint64_t n = 1; n < q; ++n)
    dlog[n] = get_u32(bytes, 20 + 4 * (n - 1));
  return CharacterTable(arith::PrimeModulus(q, g), std::move(dlog));
}

CharacterTable CharacterTable::load_or_build(std::uint64_t q,
                                             const std::filesystem::path &dir) {
  if (dir.empty())
    return build(q);
  const auto path = dir / ("chartable_" + std::to_string(q) + ".bin");
  if (std::filesystem::exists(path)) {
    try {
      auto table = load(path);
      if (table.q() == q)
        return table;
    } catch (const std::exception &) {
      // stale or corrupt entry: rebuild below
    }
  }
  auto table = build(q);
  table.save(path);
  return table;
}

// ---------------------------------------------------------------------------

std::string to_string(FamilyTag tag) {
  switch (tag) {
  case FamilyTag::twisted_sum:
    return "twisted-sum";
  case FamilyTag::l_pair:
    return "L-pair";
  case FamilyTag::dirichlet_poly:
    return "dirichlet-poly";
  case FamilyTag::abs_l_cubed:
    return "abs-L-cubed";
  case FamilyTag::l_value:
    return "L-value";
  }
  return "unknown";
}

FamilyValues::FamilyValues(std::uint64_t q, std::vector<cplx> values,
                           FamilyTag tag)
    : q_(q), values_(std::move(values)), tag_(tag) {
  if (values_.size() != (q - 3) / 2)
    throw std::invalid_argument("FamilyValues: expected (q-3)/2 entries");
}

cplx FamilyValues::at(std::uint64_t j) const {
  if (j % 2 != 0 || j < 2 || j + 3 > q_)
    throw std::out_of_range("not an even primitive character index");
  return values_[j / 2 - 1];
}

void write_family_csv(const std::filesystem::path &path,
                      const FamilyValues &values) {
  io::write_atomically(path, [&](std::ostream &out) {
    out << "j,value_re,value_im\n";
    for (std::size_t i = 0; i < values.size(); ++i)
      out << FamilyValues::index_at(i) << ','
          << io::format_double(values.values()[i].real()) << ','
          << io::format_double(values.values()[i].imag()) << '\n';
  });
}

FamilyValues read_family_csv(const std::filesystem::path &path, std::uint64_t q,
                             FamilyTag tag) {
  std::ifstream in(path);
  std::string line;
  if (!in || !std::getline(in, line) ||
      io::split_csv_line(line) != std::vector<std::string>{"j", "value_re", "value_im"})
    throw std::runtime_error("family CSV: missing `j,value_re,value_im` header");
  std::vector<cplx> values;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    const auto f = io::split_csv_line(line);
    if (f.size() != 3 || std::stoull(f[0]) != FamilyValues::index_at(values.size()))
      throw std::runtime_error("family CSV: unexpected row " + line);
    values.emplace_back(std::stod(f[1]), std::stod(f[2]));
  }
  return {q, std::move(values), tag};
}

// ---------------------------------------------------------------------------

cplx orthogonality_direct(const CharacterTable &table, std::uint64_t m,
                          std::uint64_t n) {
  if (m % table.q() == 0 || n % table.q() == 0)
    throw std::invalid_argument("orthogonality: gcd(mn, q) > 1");
  const auto ord = static_cast<long long>(table.order());
  const long long diff = static_cast<long long>(table.dlog(m)) -
                         static_cast<long long>(table.dlog(n));
  cplx acc{0.0, 0.0};
  for (auto j : table.even_primitive_indices())
    acc += unit_root((static_cast<long long>(j) * diff) % ord, ord);
  return acc;
}

long long orthogonality_closed_form(std::uint64_t q, std::uint64_t m,
                                    std::uint64_t n) {
  const long long half_phi = static_cast<long long>((q - 1) / 2);
  long long v = -1;
  if ((m % q) == (n % q))
    v += half_phi;
  if ((m + n) % q == 0)
    v += half_phi;
  return v;
}

cplx orthogonality_sum(const CharacterTable &table, std::uint64_t m,
                       std::uint64_t n) {
  const cplx direct = orthogonality_direct(table, m, n);
  const long long closed = orthogonality_closed_form(table.q(), m, n);
  if (std::abs(direct - static_cast<double>(closed)) > 1e-9 * (1.0 + std::abs(direct)) &&
      std::abs(direct - static_cast<double>(closed)) > 1e-9)
    throw std::logic_error("orthogonality: direct and closed forms disagree");
  return direct;
}

std::vector<cplx> family_from_buckets(const CharacterTable &table,
                                      std::span<const cplx> buckets) {
  const std::uint64_t ord = table.order(), half = ord / 2;
  if (buckets.size() != ord)
    throw std::invalid_argument("family_from_buckets: need q-1 buckets");
  // e(2j' k / (q-1)) has period (q-1)/2 in k, so fold before transforming.
  std::vector<cplx> folded(half);
  for (std::uint64_t k = 0; k < half; ++k)
    folded[k] = buckets[k] + buckets[k + half];
  const auto spectrum = table.half_dft()(folded, +1);
  return {spectrum.begin() + 1, spectrum.end()};
}

FamilyValues family_twisted_sums(const CharacterTable &table,
                                 std::span<const cplx> coeffs) {
  const std::uint64_t q = table.q();
  std::vector<cplx> buckets(table.order());
  const auto dl = table.dlog_table();
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (++r == q)
      r = 0;
    if (r != 0)
      buckets[dl[r]] += coeffs[i];
  }
  return {q, family_from_buckets(table, buckets), FamilyTag::twisted_sum};
}

FamilyValues family_twisted_sums_naive(const CharacterTable &table,
                                       std::span<const cplx> coeffs) {
  const std::uint64_t q = table.q(), ord = table.order();
  std::vector<cplx> roots(ord);
  for (std::uint64_t k = 0; k < ord; ++k)
    roots[k] = unit_root(static_cast<long long>(k), static_cast<long long>(ord));
  const auto dl = table.dlog_table();
  const auto js = table.even_primitive_indices();
  std::vector<cplx> out(js.size());
  for (std::size_t t = 0; t < js.size(); ++t) {
    const std::uint64_t j = js[t];
    cplx acc{0.0, 0.0};
    std::uint64_t r = 0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (++r == q)
        r = 0;
      if (r == 0)
        continue;
      acc += coeffs[i] * roots[(j * dl[r]) % ord];
    }
    out[t] = acc;
  }
  return {q, std::move(out), FamilyTag::twisted_sum};
}

// ---------------------------------------------------------------------------

AfeKernel::AfeKernel(std::uint64_t q, const special::WeightSpec &spec,
                     std::uint64_t max_products)
    : q_(q), spec_(spec) {
  const special::VWeight vplus(spec, special::Sign::plus);
  const special::VWeight vminus(spec, special::Sign::minus);
  x_cut_ = std::max(vplus.decay_cutoff(spec.truncation_eps),
                    vminus.decay_cutoff(spec.truncation_eps));
  const double qd = static_cast<double>(q);
  y_ = static_cast<std::uint64_t>(std::floor(x_cut_ * qd / pi));
  if (y_ < 1)
    y_ = 1;
  if (y_ > max_products)
    throw std::length_error("AFE kernel needs " + std::to_string(y_) +
                            " products, budget is " +
                            std::to_string(max_products));
  const cplx a = spec.shift.alpha, b = spec.shift.beta;
  second_factor_ = std::exp(-(a + b) * std::log(qd / pi));

  const special::VInterpolator ip(vplus, 0.999 * pi / qd, 1.001 * x_cut_ + 1.0);
  const special::VInterpolator im(vminus, 0.999 * pi / qd, 1.001 * x_cut_ + 1.0);
  const double log_scale = std::log(pi / qd);
  bracket_.assign(y_ + 1, cplx{});
  for (std::uint64_t N = 1; N <= y_; ++N) {
    const double ln = std::log(static_cast<double>(N));
    const double u = log_scale + ln;
    bracket_[N] = std::exp(-(0.5 + b) * ln) * ip.at_log(u) +
                  second_factor_ * std::exp(-(0.5 - a) * ln) * im.at_log(u);
  }
}

cplx AfeKernel::m_factor(std::uint64_t m) const {
  const cplx d = spec_.shift.beta - spec_.shift.alpha;
  if (d == cplx{})
    return {1.0, 0.0};
  return std::exp(d * std::log(static_cast<double>(m)));
}

std::uint64_t AfeKernel::required_products(std::uint64_t q,
                                           const special::WeightSpec &spec) {
  const special::VWeight vplus(spec, special::Sign::plus);
  const special::VWeight vminus(spec, special::Sign::minus);
  const double x_cut = std::max(vplus.decay_cutoff(spec.truncation_eps),
                                vminus.decay_cutoff(spec.truncation_eps));
  return static_cast<std::uint64_t>(
      std::floor(x_cut * static_cast<double>(q) / pi));
}

FamilyValues afe_pair_values(const CharacterTable &table,
                             const AfeKernel &kernel, unsigned workers) {
  if (kernel.q() != table.q())
    throw std::invalid_argument("afe_pair_values: kernel built for another q");
  const std::uint64_t q = table.q(), ord = table.order();
  const std::uint64_t y = kernel.max_product();
  const auto dl = table.dlog_table();

  // Fixed geometric split of m in [1, y]; block b covers [edge[b], edge[b+1]).
  constexpr std::size_t blocks = 16;
  std::vector<std::uint64_t> edge(blocks + 1);
  for (std::size_t b = 0; b <= blocks; ++b)
    edge[b] = static_cast<std::uint64_t>(
        std::floor(std::pow(static_cast<double>(y) + 1.0,
                            static_cast<double>(b) / blocks)));
  edge[0] = 1;
  edge[blocks] = y + 1;
  for (std::size_t b = 1; b <= blocks; ++b)
    edge[b] = std::max(edge[b], edge[b - 1]);

  std::vector<std::vector<cplx>> partial(blocks);
  parallel_blocks(blocks, workers, [&](std::size_t b) {
    auto &buckets = partial[b];
    buckets.assign(ord, cplx{});
    for (std::uint64_t m = edge[b]; m < edge[b + 1]; ++m) {
      const std::uint64_t mr = m % q;
      if (mr == 0)
        continue;
      const auto dm = static_cast<std::int64_t>(dl[mr]);
      const cplx pm = kernel.m_factor(m);
      const bool unit = pm == cplx{1.0, 0.0};
      const std::uint64_t nmax = y / m;
      std::uint64_t r = 0;
      for (std::uint64_t n = 1, N = m; n <= nmax; ++n, N += m) {
        if (++r == q) {
          r = 0;
          continue;
        }
        std::int64_t k = dm - static_cast<std::int64_t>(dl[r]);
        if (k < 0)
          k += static_cast<std::int64_t>(ord);
        const cplx w = kernel.product_weight(N);
        buckets[static_cast<std::size_t>(k)] += unit ? w : pm * w;
      }
    }
  });
  std::vector<cplx> total(ord, cplx{});
  for (const auto &p : partial)
    for (std::uint64_t k = 0; k < ord; ++k)
      total[k] += p[k];
  return {q, family_from_buckets(table, total), FamilyTag::l_pair};
}

FamilyValues afe_pair_values(const CharacterTable &table,
                             const special::WeightSpec &spec,
                             unsigned workers) {
  return afe_pair_values(table, AfeKernel(table.q(), spec), workers);
}

// ---------------------------------------------------------------------------

namespace {

// q^{-s} zeta(s, a/q) for a = 1..q-1, or -psi(a/q)/q at s = 1 where the
// poles cancel against sum_a chi(a) = 0.
std::vector<cplx> hurwitz_terms(std::uint64_t q, cplx s, unsigned workers) {
  const double qd = static_cast<double>(q);
  const bool at_one = s == cplx{1.0, 0.0};
  const cplx scale = std::exp(-s * std::log(qd));
  std::vector<cplx> c(q, cplx{});
  constexpr std::size_t blocks = 16;
  parallel_blocks(blocks, workers, [&](std::size_t b) {
    const std::uint64_t lo = 1 + (q - 1) * b / blocks;
    const std::uint64_t hi = 1 + (q - 1) * (b + 1) / blocks;
    for (std::uint64_t a = lo; a < hi; ++a) {
      const double x = static_cast<double>(a) / qd;
      c[a] = at_one ? -special::digamma(x) / qd
                    : scale * special::hurwitz_zeta(s, x);
    }
  });
  return c;
}

} // namespace

cplx l_value_oracle(const CharacterTable &table, std::uint64_t j, cplx s) {
  const bool at_one = s == cplx{1.0, 0.0};
  if (j % table.order() == 0 && at_one)
    throw std::invalid_argument("l_value_oracle: trivial character at s = 1");
  const std::uint64_t q = table.q();
  const double qd = static_cast<double>(q);
  const cplx scale = std::exp(-s * std::log(qd));
  cplx acc{0.0, 0.0};
  for (std::uint64_t a = 1; a < q; ++a) {
    const double x = static_cast<double>(a) / qd;
    const cplx term = at_one ? -special::digamma(x) / qd
                             : scale * special::hurwitz_zeta(s, x);
    acc += table.chi(j, a) * term;
  }
  return acc;
}

FamilyValues family_l_values(const CharacterTable &table, cplx s,
                             unsigned workers) {
  const auto c = hurwitz_terms(table.q(), s, workers);
  std::vector<cplx> buckets(table.order());
  for (std::uint64_t a = 1; a < table.q(); ++a)
    buckets[table.dlog_table()[a]] = c[a];
  return {table.q(), family_from_buckets(table, buckets), FamilyTag::l_value};
}

FamilyValues hurwitz_pair_values(const CharacterTable &table,
                                 const special::ShiftPair &shift,
                                 unsigned workers) {
  const auto la = family_l_values(table, 0.5 + shift.alpha, workers);
  const auto lb = shift.beta == shift.alpha
                      ? la
                      : family_l_values(table, 0.5 + shift.beta, workers);
  std::vector<cplx> out(la.size());
  for (std::size_t i = 0; i < la.size(); ++i) {
    const auto j = FamilyValues::index_at(i);
    out[i] = la.values()[i] * lb.at(table.conjugate_index(j));
  }
  return {table.q(), std::move(out), FamilyTag::l_pair};
}

FamilyValues dirichlet_poly_values(const CharacterTable &table,
                                   const arith::CoefficientVector &coeffs) {
  if (coeffs.q() != table.q())
    throw std::invalid_argument("dirichlet_poly_values: modulus mismatch");
  std::vector<cplx> w(coeffs.length());
  for (std::size_t a = 1; a <= coeffs.length(); ++a)
    w[a - 1] = coeffs[a] / std::sqrt(static_cast<double>(a));
  auto fam = family_twisted_sums(table, w);
  return {table.q(), {fam.values().begin(), fam.values().end()},
          FamilyTag::dirichlet_poly};
}

} // namespace lml::chars
