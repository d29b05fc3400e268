#include "kinetic/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "kinetic/errors.hpp"
#include "kinetic/io.hpp"

namespace kinetic {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
const double kLogMax = std::log(std::numeric_limits<double>::max());

// log (Σ_n w_n² g_n²)^{1/2}; -inf for the zero vector.
double log_weighted_norm(const SpectralTable& table, const ModeVector& g, const WeightSpec& w)
{
  double peak = kNegInf;
  std::vector<double> logs;
  logs.reserve(g.size());
  for (int n = 0; n < g.size(); ++n) {
    if (g(n) == 0.0) {
      continue;
    }
    const double lw = log_weight(table, w, n);
    if (lw == kNegInf) {
      continue;
    }
    const double term = lw + std::log(std::abs(g(n)));
    logs.push_back(term);
    peak = std::max(peak, term);
  }
  if (peak == kNegInf) {
    return kNegInf;
  }
  double sum = 0.0;
  for (double term : logs) {
    sum += std::exp(2.0 * (term - peak));
  }
  return peak + 0.5 * std::log(sum);
}

double relative_margin(double bound, double value, double slack)
{
  if (bound > 0.0) {
    return (bound * (1.0 + slack) - value) / bound;
  }
  return value <= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
}

class MarginTracker
{
 public:
  explicit MarginTracker(CertificationReport& report)
      : report_(report)
  {
    report_.worst_margin = std::numeric_limits<double>::infinity();
  }

  void observe(double t, double margin, const std::string& what)
  {
    if (margin < report_.worst_margin) {
      report_.worst_margin = margin;
      report_.worst_t = t;
    }
    if (margin < 0.0 && report_.pass) {
      report_.pass = false;
      report_.first_violation_t = t;
      report_.detail = what + " violated at t = " + io::fmt(t) + " (relative margin " + io::fmt(margin) + ")";
    }
  }

  void finish()
  {
    if (!std::isfinite(report_.worst_margin) && report_.worst_margin > 0.0) {
      report_.worst_margin = 0.0;
    }
  }

 private:
  CertificationReport& report_;
};

}  // namespace

double log_weight(const SpectralTable& table, const WeightSpec& w, int n)
{
  return std::visit(
      [&](const auto& spec) -> double {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, Shubin>) {
          return 0.5 * spec.tau * std::log(2.0 * n + 2.5);
        } else if constexpr (std::is_same_v<T, LogExp>) {
          if (spec.c == 0.0 || spec.t == 0.0) {
            return 0.0;
          }
          return spec.c * spec.t * log_level(n, 2.0 / spec.s);
        } else {
          const double lam = table.lambda(n);
          double lw = 0.5 * lam * spec.t;
          if (spec.lpower != 0.0) {
            lw += lam == 0.0 ? kNegInf : spec.lpower * std::log(lam);
          }
          return lw;
        }
      },
      w);
}

double weight(const SpectralTable& table, const WeightSpec& w, int n) { return std::exp(log_weight(table, w, n)); }

double weighted_norm(const SpectralTable& table, const ModeVector& g, const WeightSpec& w)
{
  const double ln = log_weighted_norm(table, g, w);
  if (ln > kLogMax) {
    throw Overflow("weighted_norm: weighted coefficients exceed the double range");
  }
  return std::exp(ln);
}

nlohmann::json CertificationReport::to_json() const
{
  nlohmann::json doc{{"check", check}, {"pass", pass}, {"worst_t", worst_t}, {"worst_margin", worst_margin}};
  doc["fitted_constants"] = nlohmann::json::object();
  for (const auto& [name, value] : fitted_constants) {
    doc["fitted_constants"][name] = value;
  }
  if (first_violation_t) {
    doc["first_violation_t"] = *first_violation_t;
  }
  if (!detail.empty()) {
    doc["detail"] = detail;
  }
  return doc;
}

void require_pass(const CertificationReport& report)
{
  if (!report.pass) {
    throw CertificationFailure(report.check + ": " + report.detail);
  }
}

std::vector<double> dissipation_integrals(const SpectralTable& table, const Trajectory& traj)
{
  std::vector<double> integral(traj.times.size(), 0.0);
  double prev = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double rate = table.lambda.dot(traj.states[i].cwiseAbs2());
    if (i > 0) {
      integral[i] = integral[i - 1] + 0.5 * (traj.times[i] - traj.times[i - 1]) * (prev + rate);
    }
    prev = rate;
  }
  return integral;
}

CertificationReport certify_energy_inequality(const SpectralTable& table, const Trajectory& traj, double g0_norm,
                                              double slack)
{
  CertificationReport report;
  report.check = "energy_inequality";
  MarginTracker tracker(report);
  const auto integral = dissipation_integrals(table, traj);
  const double bound = g0_norm * g0_norm;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double lhs = traj.states[i].squaredNorm() + 0.5 * integral[i];
    tracker.observe(traj.times[i], relative_margin(bound, lhs, slack), "energy inequality");
  }
  tracker.finish();
  return report;
}

CertificationReport certify_monotone_decay(const SpectralTable& table, const Trajectory& traj, double slack)
{
  CertificationReport report;
  report.check = "monotone_decay";
  MarginTracker tracker(report);
  const double lambda2 = table.lambda(2);
  double prev_log = kNegInf;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    // log Σ e^{λ_n t} g_n² = 2 log ‖e^{tL/2} g‖
    const double log_d = 0.5 * lambda2 * t + 2.0 * log_weighted_norm(table, traj.states[i], Semigroup{t, 0.0});
    if (i > 0) {
      double margin = 0.0;
      if (prev_log == kNegInf) {
        margin = log_d == kNegInf ? 0.0 : -std::numeric_limits<double>::infinity();
      } else {
        margin = (1.0 + slack) - std::exp(log_d - prev_log);
      }
      tracker.observe(t, margin, "monotone decay of e^{lambda_2 t/2} ||e^{tL/2} g||^2");
    }
    prev_log = log_d;
  }
  tracker.finish();
  return report;
}

double fit_c0(const SpectralTable& table)
{
  double smallest = std::numeric_limits<double>::infinity();
  for (int n = 2; n <= table.N; ++n) {
    smallest = std::min(smallest, asymptote_ratio(table, n));
  }
  return 0.5 * smallest;
}

double cs_from_c0(double c0, double s)
{
  if (!(s > 0.0 && s < 2.0)) {
    throw DomainError("cs_from_c0: require 0 < s < 2");
  }
  return 0.25 * (2.0 - s) * std::pow(s / (4.0 * c0), s / (2.0 - s));
}

CertificationReport certify_rates(const SpectralTable& table, const Trajectory& traj, double g0_norm,
                                  const RateOptions& options)
{
  CertificationReport report;
  report.check = "rates";
  MarginTracker tracker(report);
  const double s = table.s;
  const double c0 = options.c0_hat;
  const double lambda2 = table.lambda(2);
  const bool sobolev = s < 2.0;
  const double cs = sobolev ? options.cs_hat.value_or(cs_from_c0(c0, s)) : 0.0;
  const double time_power = sobolev ? s / (2.0 - s) : 0.0;
  const double k_power = sobolev ? 2.0 / (2.0 - s) : 0.0;
  double cs_needed = -std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    const auto& g = traj.states[i];
    const double bound = std::exp(-0.25 * lambda2 * t) * g0_norm;

    const double a = weighted_norm(table, g, LogExp{c0, t, s});
    tracker.observe(t, relative_margin(bound, a, options.slack), "(a) log-harmonic weighted decay");

    const double b = weighted_norm(table, g, Shubin{2.0 * c0 * t});
    tracker.observe(t, relative_margin(bound, b, options.slack), "(b) Shubin Q^{2 c0 t} decay");

    if (sobolev && t > 0.0) {
      for (int k = 1; k <= options.k_max; ++k) {
        const double scale = std::pow(1.0 / t, time_power) * std::pow(static_cast<double>(k), k_power);
        const double log_value = log_weighted_norm(table, g, Shubin{static_cast<double>(k)});
        if (bound > 0.0 && log_value != kNegInf) {
          const double log_ratio = log_value - std::log(bound);
          cs_needed = std::max(cs_needed, log_ratio / scale);
          // the bound itself may overflow, so form 1 - value/bound from logs
          const double log_margin = cs * scale + std::log1p(options.slack) - log_ratio;
          tracker.observe(t, -std::expm1(-log_margin), "(c) Shubin Q^" + std::to_string(k) + " smoothing bound");
        } else {
          tracker.observe(t, relative_margin(bound, std::exp(log_value), options.slack),
                          "(c) Shubin Q^" + std::to_string(k) + " smoothing bound");
        }
      }
    }
  }
  tracker.finish();
  report.fitted_constants["c0_hat"] = c0;
  if (sobolev) {
    report.fitted_constants["cs_hat"] = cs;
    if (std::isfinite(cs_needed)) {
      report.fitted_constants["cs_min_observed"] = cs_needed;
    }
  }
  return report;
}

bool YoungCheck::holds() const
{
  const double scale = std::max({1.0, std::abs(log_h), std::abs(log_bound)});
  return log_h >= log_bound - 64.0 * std::numeric_limits<double>::epsilon() * scale;
}

YoungCheck young_bound_check(double x, double tau, double k, double s)
{
  if (!(s > 0.0 && s < 2.0)) {
    throw DomainError("young_bound_check: require 0 < s < 2");
  }
  if (!(x >= 1.0) || !(tau > 0.0) || !(k >= 1.0)) {
    throw DomainError("young_bound_check: require x >= 1, tau > 0, k >= 1");
  }
  const double lx = std::log(x);
  YoungCheck out;
  out.log_h = 2.0 * tau * std::pow(lx, 2.0 / s) - k * lx;
  out.log_bound = -0.5 * (2.0 - s) * std::pow(s / (4.0 * tau), s / (2.0 - s)) * std::pow(k, 2.0 / (2.0 - s));
  out.h = std::exp(out.log_h);
  out.bound = std::exp(out.log_bound);
  return out;
}

double trilinear_constant_probe(const SpectralTable& table, int sample_count, std::uint64_t seed)
{
  if (sample_count < 1) {
    throw DomainError("trilinear_constant_probe: sample_count must be positive");
  }
  const int N = table.N;
  ModeVector w(N + 1);
  for (int n = 0; n <= N; ++n) {
    w(n) = std::pow(std::log(2.0 * n + 2.5), 1.0 / table.s);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  auto draw = [&] {
    ModeVector v = ModeVector::Zero(N + 1);
    for (int n = 2; n <= N; ++n) {
      v(n) = normal(rng);
    }
    return ModeVector(v / v.norm());
  };

  double best = 0.0;
  for (int i = 0; i < sample_count; ++i) {
    const ModeVector f = draw();
    const ModeVector g = draw();
    const ModeVector h = draw();
    const double num = std::abs(gamma_apply(table, f, g).dot(h));
    const double den = f.norm() * g.cwiseProduct(w).norm() * h.cwiseProduct(w).norm();
    best = std::max(best, num / den);
  }
  return best;
}

CertificationReport certify_young(int sample_count, std::uint64_t seed)
{
  CertificationReport report;
  report.check = "young_inequality";
  report.worst_margin = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int violations = 0;
  for (int i = 0; i < sample_count; ++i) {
    const double x = std::exp(unit(rng) * std::log(1e6));
    const double tau = 0.01 + unit(rng) * (5.0 - 0.01);
    const double k = 1.0 + unit(rng) * 19.0;
    const double s = 0.05 + unit(rng) * 1.9;
    const YoungCheck c = young_bound_check(x, tau, k, s);
    const double margin = c.log_h - c.log_bound;
    report.worst_margin = std::min(report.worst_margin, margin);
    if (!c.holds()) {
      ++violations;
      if (report.pass) {
        report.pass = false;
        report.detail = "h < bound at (x, tau, k, s) = (" + io::fmt(x) + ", " + io::fmt(tau) + ", " + io::fmt(k) +
                        ", " + io::fmt(s) + ")";
      }
    }
  }
  if (sample_count == 0) {
    report.worst_margin = 0.0;
  }
  report.fitted_constants["samples"] = sample_count;
  report.fitted_constants["violations"] = violations;
  return report;
}

}  // namespace kinetic
