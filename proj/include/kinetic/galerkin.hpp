#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "kinetic/spectrum.hpp"

namespace kinetic {

/// Coefficients (g_0, ..., g_N) on the orthonormal radial basis φ_{n,0,0}.
using ModeVector = Eigen::VectorXd;

inline int truncation(const ModeVector& g) { return static_cast<int>(g.size()) - 1; }

/// a · φ_n in a truncation-N mode vector.
ModeVector basis_vector(int N, int n, double a = 1.0);

/**
 * Γ(f, g) on the radial basis:
 * out_n = -f_0 g_n λ_n + Σ_{k+l=n, k,l>=1} μ_{k,l} f_k g_l.
 * Throws TruncationMismatch if f, g and the table disagree on N.
 */
ModeVector gamma_apply(const SpectralTable& table, const ModeVector& f, const ModeVector& g);

/// L^power g: coefficients scaled by λ_n^power, with 0^power = 0.
ModeVector linearized_apply(const SpectralTable& table, const ModeVector& g, double power = 1.0);

/// S_M: zero every coefficient above M.
ModeVector project(const ModeVector& g, int M);

/// c · t^p · e^{-r t}
struct ExpTerm
{
  double c = 0.0;
  int p = 0;
  double r = 0.0;
};

/// Exact per-mode solution g_n(t) = Σ c t^p e^{-r t}.
class ExpSumSolution
{
 public:
  ExpSumSolution() = default;
  explicit ExpSumSolution(std::vector<std::vector<ExpTerm>> modes)
      : modes_(std::move(modes))
  {
  }

  int truncation() const { return static_cast<int>(modes_.size()) - 1; }
  const std::vector<ExpTerm>& terms(int n) const { return modes_.at(n); }
  std::size_t term_count() const;

  double evaluate(int n, double t) const;
  ModeVector evaluate(double t) const;

  nlohmann::json to_json() const;

 private:
  std::vector<std::vector<ExpTerm>> modes_;
};

enum class SolverMethod
{
  expsum,
  adaptive_numeric,
};

struct SolveOptions
{
  SolverMethod method = SolverMethod::expsum;
  /// relative rate difference below which Duhamel takes the confluent branch
  double resonance_tol = 1e-9;
  /// per-mode exponential-term cap; exceeding it falls back to adaptive_numeric
  std::size_t term_cap = 100'000;
  double rk_tol = 1e-10;
  /// NumericBlowup once any |g_n| exceeds blowup_factor · ‖g0‖
  double blowup_factor = 1e3;
};

struct Trajectory
{
  std::vector<double> times;
  std::vector<ModeVector> states;
  SolverMethod method_used = SolverMethod::expsum;
  std::optional<ExpSumSolution> expsum;
};

/**
 * Exact Duhamel expansion of the cascade
 * ∂_t g_n + λ_n g_n = Σ_{k+l=n} μ_{k,l} g_k g_l, or nullopt when a mode
 * needs more than `options.term_cap` terms.
 */
std::optional<ExpSumSolution> build_expsum(const SpectralTable& table, const ModeVector& g0,
                                           const SolveOptions& options = {});

/**
 * Solve the truncated cascade from g0 and sample it on `times`.
 *
 * Throws InvalidInitialData unless g0_0 = g0_1 = 0, DomainError for an
 * unsorted or negative time grid, NumericBlowup past the guard.
 */
Trajectory solve_triangular(const SpectralTable& table, const ModeVector& g0, std::span<const double> times,
                            const SolveOptions& options = {});

/// `steps` equally spaced times on [0, t_max].
std::vector<double> uniform_grid(double t_max, int steps);

/// CSV header t,g_0,...,g_N then one row per time.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace kinetic
