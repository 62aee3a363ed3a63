// Batch front-end: twisted second moments, third moments, and phase-sum sweeps.
#include "lml/arithmetic.hpp"
#include "lml/characters.hpp"
#include "lml/io.hpp"
#include "lml/moment.hpp"
#include "lml/offdiag.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

using namespace lml;

namespace {

constexpr int exit_config = 2;
constexpr int exit_compute = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::uint64_t q = 0;
  std::string q_list;
  double kappa = 0.3;
  double alpha_re = 0, alpha_im = 0, beta_re = 0, beta_im = 0;
  std::string shift;
  std::string coeffs = "unit";
  std::uint64_t seed = 0;
  std::string out;
  std::string cache_dir;
  unsigned workers = 1;
  std::string oracle = "none";
  std::string method = "auto";
  std::string regime = "all";
  std::vector<std::string> boxes;
  bool grid = false;
};

std::vector<std::string> split(const std::string &s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty())
      out.push_back(item);
  return out;
}

std::uint64_t parse_u64(const std::string &s, const std::string &what) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used == s.size())
      return v;
  } catch (const std::exception &) {
  }
  throw ConfigError("bad " + what + ": " + s);
}

double parse_double(const std::string &s, const std::string &what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size())
      return v;
  } catch (const std::exception &) {
  }
  throw ConfigError("bad " + what + ": " + s);
}

void emit(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  io::write_atomically(path, [&](std::ostream &out) { out << text; });
}

std::filesystem::path cache_root(const RunConfig &cfg) {
  if (!cfg.cache_dir.empty())
    return cfg.cache_dir;
  if (const char *env = std::getenv("LML_CACHE_DIR"))
    return env;
  return {};
}

chars::CharacterTable load_table(const RunConfig &cfg, std::uint64_t q) {
  const auto dir = cache_root(cfg);
  if (!dir.empty())
    std::filesystem::create_directories(dir);
  return chars::CharacterTable::load_or_build(q, dir);
}

// unit | d12 | rand | rand:SEED | file:PATH | conv:PATH1,PATH2
arith::CoefficientVector build_coeffs(const RunConfig &cfg, std::uint64_t &seed) {
  const std::string &src = cfg.coeffs;
  seed = cfg.seed;
  if (src == "unit")
    return arith::unit_coeffs(cfg.q, cfg.kappa);
  if (src == "d12")
    return arith::d_half_coeffs(cfg.q, cfg.kappa);
  if (src == "rand")
    return arith::random_coeffs(cfg.q, cfg.kappa, seed);
  if (src.rfind("rand:", 0) == 0) {
    seed = parse_u64(src.substr(5), "coefficient seed");
    return arith::random_coeffs(cfg.q, cfg.kappa, seed);
  }
  if (src.rfind("file:", 0) == 0)
    return arith::read_coeffs_csv(src.substr(5), cfg.q, cfg.kappa);
  if (src.rfind("conv:", 0) == 0) {
    const auto files = split(src.substr(5), ',');
    if (files.size() != 2)
      throw ConfigError("conv: expects two comma-separated files");
    return arith::convolve_coeffs(arith::read_coeffs_csv(files[0], cfg.q, cfg.kappa),
                                  arith::read_coeffs_csv(files[1], cfg.q, cfg.kappa));
  }
  throw ConfigError("unknown coefficient source: " + src);
}

special::ShiftPair build_shift(const RunConfig &cfg) {
  if (cfg.shift.empty())
    return special::ShiftPair::make({cfg.alpha_re, cfg.alpha_im},
                                    {cfg.beta_re, cfg.beta_im}, cfg.q);
  if (cfg.shift == "1/logq")
    return special::ShiftPair::inverse_log(cfg.q);
  if (cfg.shift == "0")
    return special::ShiftPair::central(cfg.q);
  throw ConfigError("--shift accepts 1/logq or 0");
}

moment::PairMethod parse_method(const std::string &s) {
  if (s == "afe")
    return moment::PairMethod::afe;
  if (s == "hurwitz")
    return moment::PairMethod::hurwitz;
  if (s == "auto")
    return moment::PairMethod::automatic;
  throw ConfigError("--method accepts afe, hurwitz or auto");
}

int cmd_moment2(const RunConfig &cfg) {
  std::uint64_t seed = 0;
  special::ShiftPair shift;
  std::optional<arith::CoefficientVector> coeffs;
  moment::MomentOptions options;
  try {
    if (!arith::is_prime(cfg.q) || cfg.q < 5)
      throw ConfigError("--q must be a prime >= 5");
    if (cfg.oracle != "none" && cfg.oracle != "congruence")
      throw ConfigError("--oracle accepts none or congruence");
    if (cfg.oracle == "congruence" && cfg.q > moment::congruence_max_q)
      throw ConfigError("--oracle congruence needs q <= 400");
    shift = build_shift(cfg);
    coeffs.emplace(build_coeffs(cfg, seed));
    options.method = parse_method(cfg.method);
    options.workers = std::max(1u, cfg.workers);
    const double logq = std::log(static_cast<double>(cfg.q));
    const bool near_pole = std::abs(shift.alpha + shift.beta) < 1e-4 / logq;
    if (near_pole && cfg.oracle == "none" &&
        (shift.alpha != cplx{} || shift.beta != cplx{}))
      throw ConfigError("alpha + beta near 0 is only supported at alpha = beta = 0");
  } catch (const ConfigError &) {
    throw;
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }

  moment::MomentContext ctx(load_table(cfg, cfg.q), options);
  const auto spec = special::WeightSpec::gaussian(shift);
  moment::PairMethod used{};
  ctx.pair_values(spec, &used);
  const cplx empirical = moment::empirical_moment(ctx, *coeffs, spec);
  cplx predicted;
  std::string predicted_by;
  if (cfg.oracle == "congruence") {
    predicted = moment::congruence_moment(ctx, *coeffs, spec);
    predicted_by = "congruence";
  } else if (shift.alpha == cplx{} && shift.beta == cplx{}) {
    predicted = moment::central_main_term(cfg.q, *coeffs).value;
    predicted_by = "central-main-term";
  } else {
    predicted = moment::twisted_main_term(cfg.q, shift, *coeffs);
    predicted_by = "main-term";
  }
  moment::MomentReport report;
  report.q = cfg.q;
  report.kappa = coeffs->kappa();
  report.shift = shift;
  report.seed = seed;
  report.method = "pairs=" + moment::to_string(used) + ";predicted=" + predicted_by +
                  ";coeffs=" + arith::to_string(coeffs->origin());
  report.set_values(empirical, predicted);
  emit(cfg.out, report.to_json());
  return 0;
}

std::vector<std::uint64_t> moduli(const RunConfig &cfg) {
  std::vector<std::uint64_t> qs;
  if (!cfg.q_list.empty())
    for (const auto &s : split(cfg.q_list, ','))
      qs.push_back(parse_u64(s, "modulus"));
  else if (cfg.q != 0)
    qs.push_back(cfg.q);
  if (qs.empty())
    throw ConfigError("give --q or --q-list");
  for (auto q : qs)
    if (q < 5 || !arith::is_prime(q))
      throw ConfigError("moduli must be primes >= 5: " + std::to_string(q));
  return qs;
}

int cmd_moment3(const RunConfig &cfg) {
  const auto qs = moduli(cfg);
  std::ostringstream out;
  out << "q,moment3_even,normalized\n";
  for (auto q : qs) {
    const double m = moment::third_moment(load_table(cfg, q), std::max(1u, cfg.workers));
    const double norm = m / std::pow(std::log(static_cast<double>(q)), 2.25);
    out << q << ',' << io::format_double(m) << ',' << io::format_double(norm) << '\n';
  }
  emit(cfg.out, out.str());
  return 0;
}

int cmd_expsum(const RunConfig &cfg) {
  offdiag::SweepConfig sweep;
  try {
    sweep.q = cfg.q == 0 ? 101 : cfg.q;
    if (!arith::is_prime(sweep.q))
      throw ConfigError("--q must be prime");
    sweep.seed = cfg.seed;
    sweep.regime = offdiag::parse_regime(cfg.regime);
    if (cfg.coeffs == "unit")
      sweep.unit_coefficients = true;
    else if (cfg.coeffs != "rand")
      throw ConfigError("expsum --coeffs accepts unit or rand");
    for (const auto &spec : cfg.boxes) {
      const auto f = split(spec, ',');
      if (f.size() != 4)
        throw ConfigError("--box expects A,B,M,N");
      offdiag::DyadicBox box{sweep.q, parse_double(f[0], "A"), parse_double(f[1], "B"),
                             parse_double(f[2], "M"), parse_double(f[3], "N")};
      box.validate();
      sweep.boxes.push_back(box);
    }
    if (cfg.grid)
      for (auto box : offdiag::standard_grid())
        sweep.boxes.push_back(box);
  } catch (const ConfigError &) {
    throw;
  } catch (const std::invalid_argument &e) {
    throw ConfigError(e.what());
  }
  const auto rows = offdiag::cancellation_sweep(sweep);
  emit(cfg.out, offdiag::sweep_csv(rows));
  return 0;
}

void add_common(CLI::App *cmd, RunConfig &cfg) {
  cmd->add_option("--out", cfg.out, "Output path (default: stdout)");
  cmd->add_option("--seed", cfg.seed, "Seed for randomized coefficients")
      ->capture_default_str();
  cmd->add_option("--workers", cfg.workers, "Worker threads")->capture_default_str();
  cmd->add_option("--cache-dir", cfg.cache_dir,
                  "Character-table cache (default: $LML_CACHE_DIR)");
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Twisted moments of Dirichlet L-functions: numerical experiments"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto *m2 = app.add_subcommand("moment2", "Twisted second moment vs. prediction (JSON)");
  m2->add_option("--q", cfg.q, "Prime modulus")->required();
  m2->add_option("--kappa", cfg.kappa, "Coefficient support exponent")
      ->capture_default_str();
  m2->add_option("--alpha-re", cfg.alpha_re);
  m2->add_option("--alpha-im", cfg.alpha_im);
  m2->add_option("--beta-re", cfg.beta_re);
  m2->add_option("--beta-im", cfg.beta_im);
  m2->add_option("--shift", cfg.shift, "1/logq or 0 (overrides the component flags)");
  m2->add_option("--coeffs", cfg.coeffs,
                 "unit | d12 | rand[:SEED] | file:PATH | conv:PATH1,PATH2")
      ->capture_default_str();
  m2->add_option("--oracle", cfg.oracle, "none | congruence")->capture_default_str();
  m2->add_option("--method", cfg.method, "afe | hurwitz | auto")->capture_default_str();
  add_common(m2, cfg);

  auto *m3 = app.add_subcommand("moment3", "Even-family third moments (CSV)");
  m3->add_option("--q", cfg.q, "Prime modulus");
  m3->add_option("--q-list", cfg.q_list, "Comma-separated primes");
  add_common(m3, cfg);

  auto *ex = app.add_subcommand("expsum", "Off-diagonal and phase-sum sweep (CSV)");
  ex->add_option("--q", cfg.q, "Prime modulus (default 101)");
  ex->add_option("--box", cfg.boxes, "A,B,M,N (repeatable)");
  ex->add_flag("--grid", cfg.grid, "Append the standard 81-box grid");
  ex->add_option("--regime", cfg.regime, "all | balanced | unbalanced")
      ->capture_default_str();
  ex->add_option("--coeffs", cfg.coeffs, "unit | rand");
  add_common(ex, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_config;
  }

  try {
    if (*m2)
      return cmd_moment2(cfg);
    if (*m3)
      return cmd_moment3(cfg);
    if (*ex) {
      if (ex->count("--coeffs") == 0)
        cfg.coeffs = "rand";
      return cmd_expsum(cfg);
    }
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const std::exception &e) {
    std::cerr << "compute error: " << e.what() << '\n';
    return exit_compute;
  }
  return exit_config;
}
