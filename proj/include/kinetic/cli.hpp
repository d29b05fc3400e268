#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "kinetic/galerkin.hpp"

namespace kinetic::cli {

struct SingleMode
{
  int n = 2;
  double a = 0.05;
};

/// a_n = ±u_n (n+1)^{-decay_exponent}, n ∈ [2, N], rescaled to `norm`.
struct RandomDecay
{
  double norm = 0.05;
  double decay_exponent = 2.0;
};

struct FromFile
{
  std::filesystem::path path;
};

using InitialData = std::variant<SingleMode, RandomDecay, FromFile>;

struct RunConfig
{
  double s = 1.0;
  int N = 64;
  double tol = 1e-10;
  double t_max = 5.0;
  int t_steps = 201;
  SolverMethod method = SolverMethod::expsum;
  std::uint64_t seed = 1;
  InitialData initial_data = RandomDecay{};
  std::filesystem::path output_dir = "out";
  bool allow_large_data = false;
  /// overrides KINETIC_SPECTRAL_CACHE and the default `<output_dir>/cache`
  std::optional<std::filesystem::path> cache_dir;
};

enum class Command
{
  spectrum,
  solve,
  norms,
  verify,
};

enum ExitCode : int
{
  kSuccess = 0,
  kConfigError = 2,
  kCertificationFailure = 3,
  kNumericFailure = 4,
};

/// "single:n:a", "random:norm[:decay]" or "file:path".
InitialData parse_initial_data(const std::string& spec);
std::string to_string(const InitialData& init);

SolverMethod parse_method(const std::string& name);
std::string to_string(SolverMethod method);

/// Merge a JSON config document into `config`.
void apply_config_json(RunConfig& config, const std::filesystem::path& path);

/// Throws ConfigError on any violated RunConfig invariant.
void validate(const RunConfig& config);

std::filesystem::path cache_directory(const RunConfig& config);

ModeVector random_decay_data(int N, double norm, double decay_exponent, std::uint64_t seed);
ModeVector make_initial_data(const RunConfig& config);

/// Execute one command, writing artifacts under config.output_dir; returns an ExitCode.
int run(Command command, const RunConfig& config, std::ostream& log);

/// Parse argv and run; the process entry point.
int main(int argc, char** argv);

}  // namespace kinetic::cli
