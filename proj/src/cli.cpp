#include "kinetic/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kinetic/analysis.hpp"
#include "kinetic/errors.hpp"
#include "kinetic/io.hpp"
#include "kinetic/spectrum.hpp"

namespace kinetic::cli {

namespace {

constexpr int kTrilinearSamples = 2000;
constexpr int kYoungSamples = 10'000;
constexpr double kTrapezoidChange = 1e-8;

std::vector<std::string> split(const std::string& text, char sep, std::size_t max_parts)
{
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (parts.size() + 1 < max_parts) {
    const auto pos = text.find(sep, start);
    if (pos == std::string::npos) {
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  parts.push_back(text.substr(start));
  return parts;
}

double to_double(const std::string& text, const std::string& what)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument(text);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " from '" + text + "'");
  }
}

int to_int(const std::string& text, const std::string& what)
{
  try {
    std::size_t used = 0;
    const int v = std::stoi(text, &used);
    if (used != text.size()) {
      throw std::invalid_argument(text);
    }
    return v;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + what + " from '" + text + "'");
  }
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigError("cannot write " + path.string());
  }
  out << text;
}

nlohmann::json config_json(const RunConfig& c)
{
  return {{"s", c.s},         {"N", c.N},
          {"tol", c.tol},     {"t_max", c.t_max},
          {"t_steps", c.t_steps}, {"method", to_string(c.method)},
          {"seed", c.seed},   {"init", to_string(c.initial_data)},
          {"allow_large_data", c.allow_large_data}};
}

struct Context
{
  CollisionKernel kernel;
  SpectralTable table;
};

Context prepare_table(const RunConfig& config, std::ostream& log)
{
  CollisionKernel kernel(config.s);
  bool reused = false;
  SpectralTable table = load_or_build_table(kernel, config.N, config.tol, cache_directory(config), &reused);
  log << "spectral table: " << (reused ? "reused cache " : "built and cached ")
      << (cache_directory(config) / cache_file_name(config.s, config.N, config.tol)).string() << '\n';
  return {kernel, std::move(table)};
}

// Small-data guard: ‖g0‖² against ε₀ = 1/(4 Ĉ₁).
double check_small_data(const RunConfig& config, const SpectralTable& table, const ModeVector& g0, std::ostream& log)
{
  const double c1 = trilinear_constant_probe(table, kTrilinearSamples, config.seed);
  const double eps0 = 1.0 / (4.0 * c1);
  const double size = g0.squaredNorm();
  if (size > eps0) {
    if (!config.allow_large_data) {
      throw ConfigError("initial data has ||g0||^2 = " + io::fmt(size) + " above the small-data estimate eps0 = " +
                        io::fmt(eps0) + "; pass --allow-large-data to proceed");
    }
    log << "warning: ||g0||^2 = " << io::fmt(size) << " exceeds eps0 estimate " << io::fmt(eps0) << '\n';
  }
  return c1;
}

Trajectory solve(const RunConfig& config, const SpectralTable& table, const ModeVector& g0, int steps)
{
  SolveOptions options;
  options.method = config.method;
  const auto grid = uniform_grid(config.t_max, steps);
  return solve_triangular(table, g0, grid, options);
}

// Double the grid until the final trapezoidal dissipation integral settles.
Trajectory solve_refined(const RunConfig& config, const SpectralTable& table, const ModeVector& g0,
                         std::ostream& log)
{
  int steps = config.t_steps;
  Trajectory traj = solve(config, table, g0, steps);
  double previous = dissipation_integrals(table, traj).back();
  for (int round = 0; round < 12; ++round) {
    const int finer = 2 * steps - 1;
    Trajectory next = solve(config, table, g0, finer);
    const double current = dissipation_integrals(table, next).back();
    traj = std::move(next);
    steps = finer;
    if (std::abs(current - previous) < kTrapezoidChange) {
      break;
    }
    previous = current;
  }
  log << "time grid: " << steps << " points\n";
  return traj;
}

void write_spectrum(const RunConfig& config, const SpectralTable& table)
{
  std::ostringstream csv;
  io::write_csv_row(csv, std::vector<std::string>{"n", "lambda", "asymptote_ratio", "convolution_sum_ratio"});
  for (int n = 2; n <= table.N; ++n) {
    csv << n << ',' << io::fmt(table.lambda(n)) << ',' << io::fmt(asymptote_ratio(table, n)) << ','
        << io::fmt(convolution_sum_ratio(table, n)) << '\n';
  }
  write_text(config.output_dir / "spectrum.csv", csv.str());
}

void write_solution(const RunConfig& config, const Trajectory& traj)
{
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  write_text(config.output_dir / "trajectory.csv", csv.str());

  nlohmann::json doc{{"method", to_string(traj.method_used)}, {"config", config_json(config)}};
  doc["expsum"] = traj.expsum ? traj.expsum->to_json() : nlohmann::json(nullptr);
  write_text(config.output_dir / "trajectory.json", doc.dump(1) + '\n');
}

void write_norms(const RunConfig& config, const SpectralTable& table, const Trajectory& traj)
{
  const double c0 = fit_c0(table);
  const std::vector<double> taus{1.0, 2.0, 4.0, 8.0};
  std::vector<std::string> header{"t", "l2"};
  for (double tau : taus) {
    header.push_back("shubin_" + io::fmt(tau));
  }
  header.insert(header.end(), {"logexp_c0", "semigroup"});

  std::ostringstream csv;
  io::write_csv_row(csv, header);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const auto& g = traj.states[i];
    std::vector<double> row{t, g.norm()};
    for (double tau : taus) {
      row.push_back(weighted_norm(table, g, Shubin{tau}));
    }
    row.push_back(weighted_norm(table, g, LogExp{c0, t, table.s}));
    row.push_back(weighted_norm(table, g, Semigroup{t, 0.0}));
    io::write_csv_row(csv, row);
  }
  write_text(config.output_dir / "norms.csv", csv.str());
}

int verify(const RunConfig& config, const Context& ctx, const ModeVector& g0, double c1, std::ostream& log)
{
  const SpectralTable& table = ctx.table;
  const Trajectory traj = solve_refined(config, table, g0, log);
  const double g0_norm = g0.norm();

  std::vector<CertificationReport> reports;

  CertificationReport invariants;
  invariants.check = "table_invariants";
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 2; k <= table.N; ++k) {
    for (int l = 2; k + l <= table.N; ++l) {
      margin = std::min(margin, table.lambda(k) + table.lambda(l) - table.lambda(k + l));
    }
  }
  invariants.worst_margin = std::isfinite(margin) ? margin : 0.0;
  invariants.pass = !(margin <= 0.0);
  if (!invariants.pass) {
    invariants.detail = "super-additivity margin not positive";
  }
  reports.push_back(invariants);

  reports.push_back(certify_energy_inequality(table, traj, g0_norm));
  reports.push_back(certify_monotone_decay(table, traj));

  RateOptions rate;
  rate.c0_hat = fit_c0(table);
  CertificationReport rates = certify_rates(table, traj, g0_norm, rate);
  rates.fitted_constants["c0_scan_n_min"] = 2;
  rates.fitted_constants["c0_scan_n_max"] = table.N;
  reports.push_back(std::move(rates));

  reports.push_back(certify_young(kYoungSamples, config.seed));

  CertificationReport trilinear;
  trilinear.check = "trilinear_constant";
  trilinear.pass = std::isfinite(c1);
  trilinear.fitted_constants["C1_hat"] = c1;
  trilinear.fitted_constants["eps0_hat"] = 1.0 / (4.0 * c1);
  trilinear.fitted_constants["samples"] = kTrilinearSamples;
  reports.push_back(trilinear);

  nlohmann::json doc{{"config", config_json(config)}, {"solver", to_string(traj.method_used)}};
  doc["reports"] = nlohmann::json::array();
  bool all = true;
  for (const auto& r : reports) {
    doc["reports"].push_back(r.to_json());
    log << (r.pass ? "PASS " : "FAIL ") << r.check << (r.detail.empty() ? "" : ": " + r.detail) << '\n';
    all = all && r.pass;
  }
  doc["pass"] = all;
  write_text(config.output_dir / "report.json", doc.dump(1) + '\n');

  if (!all) {
    for (const auto& r : reports) {
      if (!r.pass) {
        throw CertificationFailure(r.check + ": " + r.detail);
      }
    }
  }
  return kSuccess;
}

}  // namespace

InitialData parse_initial_data(const std::string& spec)
{
  const auto kind_end = spec.find(':');
  const std::string kind = spec.substr(0, kind_end);
  const std::string rest = kind_end == std::string::npos ? "" : spec.substr(kind_end + 1);
  if (kind == "single") {
    const auto parts = split(rest, ':', 2);
    if (parts.size() != 2) {
      throw ConfigError("--init single expects single:n:a");
    }
    return SingleMode{to_int(parts[0], "mode index"), to_double(parts[1], "amplitude")};
  }
  if (kind == "random") {
    const auto parts = split(rest, ':', 2);
    RandomDecay r;
    r.norm = to_double(parts[0], "norm");
    if (parts.size() == 2) {
      r.decay_exponent = to_double(parts[1], "decay exponent");
    }
    return r;
  }
  if (kind == "file") {
    if (rest.empty()) {
      throw ConfigError("--init file expects file:path");
    }
    return FromFile{rest};
  }
  throw ConfigError("unknown initial data '" + spec + "' (single:n:a, random:norm[:decay], file:path)");
}

std::string to_string(const InitialData& init)
{
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SingleMode>) {
          return "single:" + std::to_string(v.n) + ":" + io::fmt(v.a);
        } else if constexpr (std::is_same_v<T, RandomDecay>) {
          return "random:" + io::fmt(v.norm) + ":" + io::fmt(v.decay_exponent);
        } else {
          return "file:" + v.path.string();
        }
      },
      init);
}

SolverMethod parse_method(const std::string& name)
{
  if (name == "expsum") {
    return SolverMethod::expsum;
  }
  if (name == "adaptive_numeric") {
    return SolverMethod::adaptive_numeric;
  }
  throw ConfigError("unknown method '" + name + "' (expsum, adaptive_numeric)");
}

std::string to_string(SolverMethod method)
{
  return method == SolverMethod::expsum ? "expsum" : "adaptive_numeric";
}

void apply_config_json(RunConfig& c, const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config " + path.string());
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
    if (doc.contains("s")) c.s = doc["s"].get<double>();
    if (doc.contains("N")) c.N = doc["N"].get<int>();
    if (doc.contains("n_modes")) c.N = doc["n_modes"].get<int>();
    if (doc.contains("tol")) c.tol = doc["tol"].get<double>();
    if (doc.contains("t_max")) c.t_max = doc["t_max"].get<double>();
    if (doc.contains("t_steps")) c.t_steps = doc["t_steps"].get<int>();
    if (doc.contains("method")) c.method = parse_method(doc["method"].get<std::string>());
    if (doc.contains("seed")) c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("init")) c.initial_data = parse_initial_data(doc["init"].get<std::string>());
    if (doc.contains("out")) c.output_dir = doc["out"].get<std::string>();
    if (doc.contains("allow_large_data")) c.allow_large_data = doc["allow_large_data"].get<bool>();
    if (doc.contains("cache_dir")) c.cache_dir = doc["cache_dir"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

void validate(const RunConfig& c)
{
  if (!(c.s > 0.0 && c.s <= 2.0)) {
    throw ConfigError("s must lie in (0, 2], got " + io::fmt(c.s));
  }
  if (c.N < 2) {
    throw ConfigError("N must be at least 2, got " + std::to_string(c.N));
  }
  if (!(c.tol > 0.0 && c.tol < 1e-2)) {
    throw ConfigError("tol must lie in (0, 1e-2)");
  }
  if (!(c.t_max > 0.0)) {
    throw ConfigError("t_max must be positive");
  }
  if (c.t_steps < 2) {
    throw ConfigError("t_steps must be at least 2");
  }
  if (const auto* single = std::get_if<SingleMode>(&c.initial_data)) {
    if (single->n < 2 || single->n > c.N) {
      throw ConfigError("single-mode index must lie in [2, N]");
    }
  }
  if (const auto* random = std::get_if<RandomDecay>(&c.initial_data)) {
    if (!(random->norm >= 0.0)) {
      throw ConfigError("random initial data norm must be nonnegative");
    }
  }
}

std::filesystem::path cache_directory(const RunConfig& config)
{
  if (config.cache_dir) {
    return *config.cache_dir;
  }
  if (const char* env = std::getenv("KINETIC_SPECTRAL_CACHE"); env && *env) {
    return env;
  }
  return config.output_dir / "cache";
}

ModeVector random_decay_data(int N, double norm, double decay_exponent, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  ModeVector g = ModeVector::Zero(N + 1);
  for (int n = 2; n <= N; ++n) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double sign = (rng() & 1u) ? 1.0 : -1.0;
    g(n) = sign * u * std::pow(n + 1.0, -decay_exponent);
  }
  const double current = g.norm();
  if (current > 0.0) {
    g *= norm / current;
  }
  return g;
}

ModeVector make_initial_data(const RunConfig& config)
{
  return std::visit(
      [&](const auto& v) -> ModeVector {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, SingleMode>) {
          return basis_vector(config.N, v.n, v.a);
        } else if constexpr (std::is_same_v<T, RandomDecay>) {
          return random_decay_data(config.N, v.norm, v.decay_exponent, config.seed);
        } else {
          std::ifstream in(v.path);
          if (!in) {
            throw ConfigError("cannot open initial data " + v.path.string());
          }
          std::vector<double> coeffs;
          try {
            const auto doc = nlohmann::json::parse(in);
            coeffs = (doc.is_object() ? doc.at("coeffs") : doc).template get<std::vector<double>>();
          } catch (const nlohmann::json::exception& e) {
            throw ConfigError("initial data " + v.path.string() + ": " + e.what());
          }
          if (static_cast<int>(coeffs.size()) > config.N + 1) {
            throw ConfigError("initial data has more than N + 1 coefficients");
          }
          ModeVector g = ModeVector::Zero(config.N + 1);
          for (std::size_t i = 0; i < coeffs.size(); ++i) {
            g(static_cast<Eigen::Index>(i)) = coeffs[i];
          }
          return g;
        }
      },
      config.initial_data);
}

int run(Command command, const RunConfig& config, std::ostream& log)
{
  const char* name = command == Command::spectrum ? "spectrum"
                     : command == Command::solve  ? "solve"
                     : command == Command::norms  ? "norms"
                                                  : "verify";
  try {
    validate(config);
    std::filesystem::create_directories(config.output_dir);
    Context ctx = prepare_table(config, log);

    if (command == Command::spectrum) {
      write_spectrum(config, ctx.table);
      return kSuccess;
    }

    const ModeVector g0 = make_initial_data(config);
    if (g0(0) != 0.0 || g0(1) != 0.0) {
      throw ConfigError("initial data must have g_0 = g_1 = 0");
    }
    const double c1 = check_small_data(config, ctx.table, g0, log);

    switch (command) {
      case Command::solve:
        write_solution(config, solve(config, ctx.table, g0, config.t_steps));
        return kSuccess;
      case Command::norms:
        write_norms(config, ctx.table, solve(config, ctx.table, g0, config.t_steps));
        return kSuccess;
      default:
        return verify(config, ctx, g0, c1, log);
    }
  } catch (const ConfigError& e) {
    log << "error [" << name << "/config]: " << e.what() << '\n';
    return kConfigError;
  } catch (const InvalidInitialData& e) {
    log << "error [" << name << "/config]: " << e.what() << '\n';
    return kConfigError;
  } catch (const CertificationFailure& e) {
    log << "error [" << name << "/certification]: " << e.what() << '\n';
    return kCertificationFailure;
  } catch (const Error& e) {
    // NonConvergence, NumericBlowup, Overflow, InvariantViolation
    log << "error [" << name << "/numeric]: " << e.what() << '\n';
    return kNumericFailure;
  }
}

int main(int argc, char** argv)
{
  CLI::App app{"Spectral Galerkin solver for the radially symmetric homogeneous Boltzmann equation"};
  app.require_subcommand(1);

  RunConfig config;
  std::string config_path;
  std::string method = "expsum";
  std::string init = "random:0.05:2";
  std::string out = "out";

  app.add_option("--config", config_path, "JSON config file (flags override it)");
  auto* o_s = app.add_option("--s", config.s, "kernel parameter s in (0, 2]");
  auto* o_n = app.add_option("--n-modes", config.N, "truncation order N");
  auto* o_tol = app.add_option("--tol", config.tol, "quadrature tolerance");
  auto* o_tmax = app.add_option("--t-max", config.t_max, "final time");
  auto* o_steps = app.add_option("--t-steps", config.t_steps, "number of grid times");
  auto* o_method = app.add_option("--method", method, "expsum | adaptive_numeric");
  auto* o_seed = app.add_option("--seed", config.seed, "seed for random initial data");
  auto* o_init = app.add_option("--init", init, "single:n:a | random:norm[:decay] | file:path");
  auto* o_out = app.add_option("--out", out, "output directory");
  auto* o_large = app.add_flag("--allow-large-data", config.allow_large_data, "skip the small-data guard");

  auto* spectrum = app.add_subcommand("spectrum", "eigenvalue and coupling table, diagnostics CSV");
  auto* solve_cmd = app.add_subcommand("solve", "trajectory CSV and exponential-sum JSON");
  auto* norms = app.add_subcommand("norms", "L2, Shubin and log-harmonic norms along the trajectory");
  auto* verify_cmd = app.add_subcommand("verify", "run every certification, nonzero exit on failure");
  for (auto* sub : {spectrum, solve_cmd, norms, verify_cmd}) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    RunConfig merged;
    if (!config_path.empty()) {
      apply_config_json(merged, config_path);
    }
    if (o_s->count()) merged.s = config.s;
    if (o_n->count()) merged.N = config.N;
    if (o_tol->count()) merged.tol = config.tol;
    if (o_tmax->count()) merged.t_max = config.t_max;
    if (o_steps->count()) merged.t_steps = config.t_steps;
    if (o_method->count()) merged.method = parse_method(method);
    if (o_seed->count()) merged.seed = config.seed;
    if (o_init->count()) merged.initial_data = parse_initial_data(init);
    if (o_out->count()) merged.output_dir = out;
    if (o_large->count()) merged.allow_large_data = true;
    config = merged;
  } catch (const ConfigError& e) {
    std::cerr << "error [config]: " << e.what() << '\n';
    return kConfigError;
  }

  Command command = Command::verify;
  if (spectrum->parsed()) command = Command::spectrum;
  if (solve_cmd->parsed()) command = Command::solve;
  if (norms->parsed()) command = Command::norms;
  return run(command, config, std::cerr);
}

}  // namespace kinetic::cli
