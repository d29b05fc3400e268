#include "kinetic/spectrum.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kinetic/errors.hpp"
#include "kinetic/quad.hpp"
#include "kinetic/specfun.hpp"

namespace kinetic {

namespace {

constexpr const char* kKernelTag = "debye-yukawa-representative";

// 1 - cos^{m}θ computed from sin²θ, accurate as θ -> 0.
double one_minus_cos_pow(double theta, double m)
{
  const double sn = std::sin(theta);
  return -std::expm1(0.5 * m * std::log1p(-sn * sn));
}

template <typename F>
void parallel_for(int count, unsigned threads, F&& body)
{
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = count;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) {
      pool.emplace_back(worker);
    }
    worker();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

std::string format_g17(double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

double log_level(int n, double power) { return std::pow(std::log(2.0 * n + 2.5), power); }

double lambda_radial(const CollisionKernel& kernel, int n, double tol)
{
  if (n < 0) {
    throw DomainError("lambda_radial: negative mode index");
  }
  if (n <= 1) {
    return 0.0;
  }
  const auto integrand = [&kernel, n](double theta) {
    const double sn = std::sin(theta);
    return kernel.beta(theta) * (one_minus_cos_pow(theta, 2.0 * n) - std::pow(sn, 2 * n));
  };
  return quad::integrate(integrand, 0.0, kernel.theta_max(), tol, true).value;
}

double lambda_general(const CollisionKernel& kernel, int n, int l, double tol)
{
  if (n < 0 || l < 0) {
    throw DomainError("lambda_general: negative index");
  }
  const double delta = (n == 0 && l == 0) ? 1.0 : 0.0;
  const int m = 2 * n + l;
  const auto integrand = [&kernel, delta, m, l](double theta) {
    const double sn = std::sin(theta);
    const double half = std::sin(0.5 * theta);
    // c^m P_l(c) = (1 + cm1)(1 + e)
    const double cm1 = -one_minus_cos_pow(theta, m);
    const double e = specfun::legendre_minus_one(l, 2.0 * half * half);
    const double one_minus_cos_term = -(cm1 + e + cm1 * e);
    const double sin_term = std::pow(sn, m) * specfun::legendre(l, sn);
    return kernel.beta(theta) * (delta + one_minus_cos_term - sin_term);
  };
  return quad::integrate(integrand, 0.0, kernel.theta_max(), tol, true).value;
}

double mu_prefactor(int k, int l)
{
  return std::exp(0.5 * (std::lgamma(2.0 * k + 2.0 * l + 2.0) - std::lgamma(2.0 * k + 2.0) -
                         std::lgamma(2.0 * l + 2.0)));
}

double mu(const CollisionKernel& kernel, int k, int l, MomentRoute route, double tol)
{
  if (k < 1 || l < 1) {
    throw DomainError("mu: require k, l >= 1");
  }
  return mu_prefactor(k, l) * kernel.moment(k, l, route, tol);
}

std::pair<double, double> self_interaction(const CollisionKernel& kernel, int n, double tol)
{
  if (n < 0) {
    throw DomainError("self_interaction: negative mode index");
  }
  if (n == 0) {
    return {0.0, 0.0};
  }
  const auto cos_part = [&kernel, n](double theta) {
    return -kernel.beta(theta) * one_minus_cos_pow(theta, 2.0 * n);
  };
  const auto sin_part = [&kernel, n](double theta) {
    return kernel.beta(theta) * std::pow(std::sin(theta), 2 * n);
  };
  const double a = quad::integrate(cos_part, 0.0, kernel.theta_max(), tol, true).value;
  const double b = quad::integrate(sin_part, 0.0, kernel.theta_max(), tol, true).value;
  return {a, b};
}

void check_invariants(const SpectralTable& t)
{
  if (t.N < 2 || t.lambda.size() != t.N + 1 || t.mu.rows() != t.N + 1 || t.mu.cols() != t.N + 1) {
    throw InvariantViolation("spectral table: inconsistent shape for N = " + std::to_string(t.N));
  }
  if (t.lambda(0) != 0.0 || t.lambda(1) != 0.0) {
    throw InvariantViolation("spectral table: lambda_0 and lambda_1 must be exactly 0");
  }
  for (int n = 2; n <= t.N; ++n) {
    if (!(t.lambda(n) > 0.0)) {
      throw InvariantViolation("spectral table: lambda not positive at n = " + std::to_string(n));
    }
    if (n > 2 && !(t.lambda(n) > t.lambda(n - 1))) {
      throw InvariantViolation("spectral table: lambda not increasing at n = " + std::to_string(n));
    }
  }
  for (int k = 1; k < t.N; ++k) {
    for (int l = 1; k + l <= t.N; ++l) {
      if (!(t.mu(k, l) > 0.0)) {
        throw InvariantViolation("spectral table: mu not positive at (k, l) = (" + std::to_string(k) + ", " +
                                 std::to_string(l) + ")");
      }
    }
  }
  for (int k = 2; k <= t.N; ++k) {
    for (int l = 2; k + l <= t.N; ++l) {
      if (!(t.lambda(k) + t.lambda(l) > t.lambda(k + l))) {
        throw InvariantViolation("spectral table: super-additivity fails at (k, l) = (" + std::to_string(k) +
                                 ", " + std::to_string(l) + ")");
      }
    }
  }
}

SpectralTable build_table(const CollisionKernel& kernel, int N, double tol, unsigned threads)
{
  if (N < 2) {
    throw DomainError("build_table: N must be at least 2");
  }
  SpectralTable table;
  table.s = kernel.s();
  table.N = N;
  table.tol = tol;
  table.lambda = Eigen::VectorXd::Zero(N + 1);
  table.mu = Eigen::MatrixXd::Zero(N + 1, N + 1);

  parallel_for(N - 1, threads, [&](int i) { table.lambda(i + 2) = lambda_radial(kernel, i + 2, tol); });

  std::vector<std::pair<int, int>> pairs;
  for (int k = 1; k < N; ++k) {
    for (int l = 1; k + l <= N; ++l) {
      pairs.emplace_back(k, l);
    }
  }
  parallel_for(static_cast<int>(pairs.size()), threads, [&](int i) {
    const auto [k, l] = pairs[i];
    table.mu(k, l) = mu(kernel, k, l, MomentRoute::theta, tol);
  });

  check_invariants(table);
  return table;
}

void save_table(const SpectralTable& t, const std::filesystem::path& path)
{
  nlohmann::json doc;
  doc["kernel"] = kKernelTag;
  doc["s"] = t.s;
  doc["N"] = t.N;
  doc["tol"] = t.tol;
  doc["lambda"] = std::vector<double>(t.lambda.data(), t.lambda.data() + t.lambda.size());
  nlohmann::json mu = nlohmann::json::array();
  for (int k = 1; k < t.N; ++k) {
    for (int l = 1; k + l <= t.N; ++l) {
      mu.push_back({k, l, t.mu(k, l)});
    }
  }
  doc["mu"] = std::move(mu);

  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  // write-then-rename so a concurrent reader never sees a partial file
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      throw Error("save_table: cannot open " + tmp.string());
    }
    out << doc.dump(1) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

SpectralTable load_table(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error("load_table: cannot open " + path.string());
  }
  SpectralTable t;
  try {
    const auto doc = nlohmann::json::parse(in);
    if (doc.value("kernel", std::string{}) != kKernelTag) {
      throw Error("load_table: unknown kernel tag in " + path.string());
    }
    t.s = doc.at("s").get<double>();
    t.N = doc.at("N").get<int>();
    t.tol = doc.at("tol").get<double>();
    if (t.N < 2) {
      throw InvariantViolation("load_table: N below 2 in " + path.string());
    }
    const auto lambda = doc.at("lambda").get<std::vector<double>>();
    t.lambda = Eigen::Map<const Eigen::VectorXd>(lambda.data(), static_cast<Eigen::Index>(lambda.size()));
    t.mu = Eigen::MatrixXd::Zero(t.N + 1, t.N + 1);
    for (const auto& entry : doc.at("mu")) {
      const int k = entry.at(0).get<int>();
      const int l = entry.at(1).get<int>();
      if (k < 1 || l < 1 || k + l > t.N) {
        throw InvariantViolation("load_table: mu entry out of range");
      }
      t.mu(k, l) = entry.at(2).get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("load_table: " + path.string() + ": " + e.what());
  }
  check_invariants(t);
  return t;
}

std::string cache_file_name(double s, int N, double tol)
{
  return "spectral_s" + format_g17(s) + "_N" + std::to_string(N) + "_tol" + format_g17(tol) + ".json";
}

SpectralTable load_or_build_table(const CollisionKernel& kernel, int N, double tol,
                                  const std::filesystem::path& cache_dir, bool* reused)
{
  const auto path = cache_dir / cache_file_name(kernel.s(), N, tol);
  if (std::filesystem::exists(path)) {
    try {
      SpectralTable t = load_table(path);
      if (t.s == kernel.s() && t.N == N && t.tol == tol) {
        if (reused) {
          *reused = true;
        }
        return t;
      }
    } catch (const Error&) {
      // corrupt or foreign file: rebuild over it
    }
  }
  SpectralTable t = build_table(kernel, N, tol);
  save_table(t, path);
  if (reused) {
    *reused = false;
  }
  return t;
}

double asymptote_ratio(const SpectralTable& t, int n)
{
  if (n < 2 || n > t.N) {
    throw DomainError("asymptote_ratio: n out of [2, N]");
  }
  return t.lambda(n) / log_level(n, 2.0 / t.s);
}

double convolution_sum_ratio(const SpectralTable& t, int n)
{
  if (n < 2 || n > t.N) {
    throw DomainError("convolution_sum_ratio: n out of [2, N]");
  }
  const double p = 2.0 / t.s;
  double sum = 0.0;
  for (int l = 1; l < n; ++l) {
    const double m = t.coupling(n - l, l);
    sum += m * m / log_level(l, p);
  }
  return sum / log_level(n, p);
}

}  // namespace kinetic
