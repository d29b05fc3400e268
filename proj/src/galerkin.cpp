#include "kinetic/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kinetic/errors.hpp"
#include "kinetic/io.hpp"

namespace kinetic {

namespace {

void require_same_truncation(const SpectralTable& table, const ModeVector& v, const char* what)
{
  if (truncation(v) != table.N) {
    throw TruncationMismatch(std::string(what) + ": mode vector has N = " + std::to_string(truncation(v)) +
                             " but the table has N = " + std::to_string(table.N));
  }
}

double factorial(int p)
{
  double f = 1.0;
  for (int i = 2; i <= p; ++i) {
    f *= i;
  }
  return f;
}

bool same_rate(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b)); }

// Sort by (p, r), merge coincident rates, prune negligible terms.
void normalize(std::vector<ExpTerm>& terms, double rate_tol)
{
  std::sort(terms.begin(), terms.end(), [](const ExpTerm& x, const ExpTerm& y) {
    return x.p != y.p ? x.p < y.p : x.r < y.r;
  });
  std::vector<ExpTerm> merged;
  merged.reserve(terms.size());
  for (const auto& t : terms) {
    if (!merged.empty() && merged.back().p == t.p && same_rate(merged.back().r, t.r, rate_tol)) {
      merged.back().c += t.c;
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const ExpTerm& t) { return !(std::abs(t.c) >= 1e-300); });
  terms = std::move(merged);
}

// Dormand–Prince 5(4) tableau.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192, kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920, kE5 = -17253.0 / 339200,
                 kE6 = 22.0 / 525, kE7 = -1.0 / 40;

class CascadeIntegrator
{
 public:
  CascadeIntegrator(const SpectralTable& table, double tol)
      : table_(table)
      , tol_(tol)
  {
  }

  ModeVector rhs(const ModeVector& g) const
  {
    return gamma_apply(table_, g, g) - table_.lambda.cwiseProduct(g);
  }

  // Advance y from t0 to t1 with error control; h carries the step size across calls.
  void advance(ModeVector& y, double t0, double t1, double& h) const
  {
    double t = t0;
    ModeVector k1 = rhs(y);
    int steps = 0;
    while (t < t1) {
      if (++steps > 10'000'000) {
        throw NonConvergence("adaptive_numeric: step budget exhausted");
      }
      const bool last = t + h >= t1;
      const double step = last ? t1 - t : h;
      const ModeVector k2 = rhs(y + step * (kA21 * k1));
      const ModeVector k3 = rhs(y + step * (kA31 * k1 + kA32 * k2));
      const ModeVector k4 = rhs(y + step * (kA41 * k1 + kA42 * k2 + kA43 * k3));
      const ModeVector k5 = rhs(y + step * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
      const ModeVector k6 = rhs(y + step * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
      const ModeVector y_new = y + step * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
      const ModeVector k7 = rhs(y_new);
      const ModeVector err = step * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

      const ModeVector scale = (y.cwiseAbs().cwiseMax(y_new.cwiseAbs()) * tol_).array() + tol_;
      const double norm = err.cwiseQuotient(scale).cwiseAbs().maxCoeff();
      if (!std::isfinite(norm)) {
        throw NumericBlowup("adaptive_numeric: non-finite state");
      }
      if (norm <= 1.0) {
        t = last ? t1 : t + step;
        y = y_new;
        k1 = k7;
      }
      const double factor = norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(norm, -0.2), 0.2, 5.0);
      if (!last || norm > 1.0) {
        h = step * factor;
      }
      if (h < 1e-14 * std::max(1.0, std::abs(t))) {
        throw NonConvergence("adaptive_numeric: step size underflow at t = " + std::to_string(t));
      }
    }
  }

 private:
  const SpectralTable& table_;
  double tol_;
};

void check_guard(const ModeVector& g, double guard, double t)
{
  const double peak = g.cwiseAbs().maxCoeff();
  if (!std::isfinite(peak) || peak > guard) {
    throw NumericBlowup("solve_triangular: |g_n| = " + io::fmt(peak) + " exceeds guard " + io::fmt(guard) +
                        " at t = " + io::fmt(t) + " (initial data outside the small-data regime?)");
  }
}

}  // namespace

ModeVector basis_vector(int N, int n, double a)
{
  if (n < 0 || n > N) {
    throw DomainError("basis_vector: index out of range");
  }
  ModeVector v = ModeVector::Zero(N + 1);
  v(n) = a;
  return v;
}

ModeVector gamma_apply(const SpectralTable& table, const ModeVector& f, const ModeVector& g)
{
  require_same_truncation(table, f, "gamma_apply");
  require_same_truncation(table, g, "gamma_apply");
  const int N = table.N;
  ModeVector out = -f(0) * table.lambda.cwiseProduct(g);
  for (int n = 2; n <= N; ++n) {
    double acc = 0.0;
    for (int k = 1; k < n; ++k) {
      acc += table.mu(k, n - k) * f(k) * g(n - k);
    }
    out(n) += acc;
  }
  return out;
}

ModeVector linearized_apply(const SpectralTable& table, const ModeVector& g, double power)
{
  require_same_truncation(table, g, "linearized_apply");
  ModeVector out(g.size());
  for (Eigen::Index n = 0; n < g.size(); ++n) {
    const double lam = table.lambda(n);
    out(n) = lam == 0.0 ? 0.0 : std::pow(lam, power) * g(n);
  }
  return out;
}

ModeVector project(const ModeVector& g, int M)
{
  if (M < 0 || M > truncation(g)) {
    throw DomainError("project: require 0 <= M <= N");
  }
  ModeVector out = g;
  out.tail(g.size() - M - 1).setZero();
  return out;
}

std::size_t ExpSumSolution::term_count() const
{
  std::size_t count = 0;
  for (const auto& m : modes_) {
    count += m.size();
  }
  return count;
}

double ExpSumSolution::evaluate(int n, double t) const
{
  double acc = 0.0;
  for (const auto& term : modes_.at(n)) {
    acc += term.c * std::pow(t, term.p) * std::exp(-term.r * t);
  }
  return acc;
}

ModeVector ExpSumSolution::evaluate(double t) const
{
  ModeVector g(modes_.size());
  for (int n = 0; n < static_cast<int>(modes_.size()); ++n) {
    g(n) = evaluate(n, t);
  }
  return g;
}

nlohmann::json ExpSumSolution::to_json() const
{
  nlohmann::json modes = nlohmann::json::array();
  for (int n = 0; n < static_cast<int>(modes_.size()); ++n) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : modes_[n]) {
      terms.push_back({{"c", t.c}, {"p", t.p}, {"r", t.r}});
    }
    modes.push_back({{"n", n}, {"terms", std::move(terms)}});
  }
  return {{"representation", "g_n(t) = sum c * t^p * exp(-r t)"}, {"N", truncation()}, {"modes", std::move(modes)}};
}

std::optional<ExpSumSolution> build_expsum(const SpectralTable& table, const ModeVector& g0,
                                           const SolveOptions& options)
{
  require_same_truncation(table, g0, "build_expsum");
  const int N = table.N;
  std::vector<std::vector<ExpTerm>> modes(N + 1);

  for (int n = 2; n <= N; ++n) {
    const double lam = table.lambda(n);

    std::size_t products = 0;
    for (int k = 2; k + 2 <= n; ++k) {
      products += modes[k].size() * modes[n - k].size();
    }
    if (products > 50 * options.term_cap) {
      return std::nullopt;
    }

    std::vector<ExpTerm> source;
    source.reserve(products);
    for (int k = 2; k + 2 <= n; ++k) {
      const int l = n - k;
      const double m = table.mu(k, l);
      for (const auto& a : modes[k]) {
        for (const auto& b : modes[l]) {
          source.push_back({m * a.c * b.c, a.p + b.p, a.r + b.r});
        }
      }
    }
    normalize(source, options.resonance_tol);

    std::vector<ExpTerm> out;
    out.reserve(2 * source.size() + 1);
    double homogeneous = g0(n);
    for (const auto& src : source) {
      const double delta = src.r - lam;
      if (same_rate(src.r, lam, options.resonance_tol)) {
        out.push_back({src.c / (src.p + 1), src.p + 1, lam});
        continue;
      }
      const double base = src.c * factorial(src.p) / std::pow(delta, src.p + 1);
      homogeneous += base;
      double dj = 1.0;  // δ^j / j!
      for (int j = 0; j <= src.p; ++j) {
        out.push_back({-base * dj, j, src.r});
        dj *= delta / (j + 1);
      }
    }
    out.push_back({homogeneous, 0, lam});
    normalize(out, options.resonance_tol);

    if (out.size() > options.term_cap) {
      return std::nullopt;
    }
    modes[n] = std::move(out);
  }
  return ExpSumSolution(std::move(modes));
}

std::vector<double> uniform_grid(double t_max, int steps)
{
  if (steps < 2 || !(t_max > 0.0)) {
    throw DomainError("uniform_grid: require steps >= 2 and t_max > 0");
  }
  std::vector<double> grid(steps);
  for (int i = 0; i < steps; ++i) {
    grid[i] = t_max * i / (steps - 1);
  }
  grid.back() = t_max;
  return grid;
}

Trajectory solve_triangular(const SpectralTable& table, const ModeVector& g0, std::span<const double> times,
                            const SolveOptions& options)
{
  require_same_truncation(table, g0, "solve_triangular");
  if (g0(0) != 0.0 || g0(1) != 0.0) {
    throw InvalidInitialData("solve_triangular: g0 must be orthogonal to the collision invariants (g_0 = g_1 = 0)");
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1])) {
      throw DomainError("solve_triangular: time grid must be sorted and nonnegative");
    }
  }

  const double guard = options.blowup_factor * g0.norm();
  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.states.reserve(times.size());

  if (options.method == SolverMethod::expsum) {
    auto solution = build_expsum(table, g0, options);
    if (solution) {
      for (double t : times) {
        ModeVector g = solution->evaluate(t);
        check_guard(g, guard, t);
        traj.states.push_back(std::move(g));
      }
      traj.method_used = SolverMethod::expsum;
      traj.expsum = std::move(solution);
      return traj;
    }
  }

  traj.method_used = SolverMethod::adaptive_numeric;
  CascadeIntegrator integrator(table, options.rk_tol);
  ModeVector y = g0;
  double t = 0.0;
  double h = 1e-3;
  for (double target : times) {
    if (target > t) {
      integrator.advance(y, t, target, h);
      t = target;
    }
    check_guard(y, guard, t);
    traj.states.push_back(y);
  }
  return traj;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory)
{
  const int N = trajectory.states.empty() ? -1 : truncation(trajectory.states.front());
  std::vector<std::string> header{"t"};
  for (int n = 0; n <= N; ++n) {
    header.push_back("g_" + std::to_string(n));
  }
  io::write_csv_row(out, header);
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    std::vector<double> row{trajectory.times[i]};
    const auto& g = trajectory.states[i];
    row.insert(row.end(), g.data(), g.data() + g.size());
    io::write_csv_row(out, row);
  }
}

}  // namespace kinetic
