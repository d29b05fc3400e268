#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "kinetic/kernel.hpp"

namespace kinetic {

inline constexpr double kDefaultTol = 1e-10;

/**
 * Cached radial eigenvalues λ_{n,0} (0 <= n <= N) and coupling coefficients
 * μ_{k,l} (k, l >= 1, k + l <= N) for one kernel.
 *
 * `mu` is stored densely as an (N+1)×(N+1) matrix; entries outside the
 * admissible triangle are zero.
 */
struct SpectralTable
{
  double s = 1.0;
  int N = 0;
  double tol = kDefaultTol;
  Eigen::VectorXd lambda;
  Eigen::MatrixXd mu;

  /// μ_{k,l}; zero when k or l is < 1 or k + l > N.
  double coupling(int k, int l) const
  {
    if (k < 1 || l < 1 || k + l > N) {
      return 0.0;
    }
    return mu(k, l);
  }
};

/// λ_{n,0}; exactly zero for n ∈ {0, 1}.
double lambda_radial(const CollisionKernel& kernel, int n, double tol = kDefaultTol);

/// λ_{n,l} of the full linearized operator.
double lambda_general(const CollisionKernel& kernel, int n, int l, double tol = kDefaultTol);

/// sqrt((2k+2l+1)! / ((2k+1)! (2l+1)!)) through log-gamma.
double mu_prefactor(int k, int l);

/// μ_{k,l} = prefactor(k, l) · moment(k, l) for k, l >= 1.
double mu(const CollisionKernel& kernel, int k, int l, MomentRoute route = MomentRoute::theta,
          double tol = kDefaultTol);

/**
 * The two coefficients of Γ(φ₀, φ_n) = a φ_n and Γ(φ_n, φ₀) = b φ_n:
 * a = ∫ β (cos^{2n}θ - 1), b = ∫ β (sin^{2n}θ - δ_{0,n}). Their sum is -λ_{n,0}.
 */
std::pair<double, double> self_interaction(const CollisionKernel& kernel, int n, double tol = kDefaultTol);

/// Throws InvariantViolation naming the first failing n or (k, l).
void check_invariants(const SpectralTable& table);

/// Quadratures for every λ and μ (threads = 0 picks hardware concurrency).
SpectralTable build_table(const CollisionKernel& kernel, int N, double tol = kDefaultTol, unsigned threads = 0);

void save_table(const SpectralTable& table, const std::filesystem::path& path);
SpectralTable load_table(const std::filesystem::path& path);

/// File name encoding (s, N, tol).
std::string cache_file_name(double s, int N, double tol);

/// Reuse `cache_dir/cache_file_name(...)` if present, otherwise build and persist it.
SpectralTable load_or_build_table(const CollisionKernel& kernel, int N, double tol,
                                  const std::filesystem::path& cache_dir, bool* reused = nullptr);

/// λ_{n,0} / (log(2n + 5/2))^{2/s}, 2 <= n <= N.
double asymptote_ratio(const SpectralTable& table, int n);

/// Σ_{k+l=n} μ_{k,l}² / (log(2l+5/2))^{2/s}, divided by (log(2n+5/2))^{2/s}.
double convolution_sum_ratio(const SpectralTable& table, int n);

/// (log(2n + 5/2))^{power}
double log_level(int n, double power);

}  // namespace kinetic
