#pragma once

// Benchmark harness: synthetic ground truth and coil sensitivities, noisy
// k-space simulation, experiment configuration files, and per-solver CSV
// output.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cqnp/operators.hpp"
#include "cqnp/solvers.hpp"

namespace cqnp {

/// Raised for malformed or inconsistent experiment configuration.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class TrajectoryKind { radial, spiral };

struct ExperimentConfig {
  int size = 64;
  TrajectoryKind trajectory = TrajectoryKind::radial;
  int spokes = 16;
  int interleaves = 8;
  int readout = 64;
  int coils = 2;
  double noise_var = 1e-2;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::apm, Method::cqnpm};
  double lambda = 5e-4;
  double alpha = 1.0;
  double eta = 1e-5;
  double gamma = 1.7;
  double xi = 1.0;
  double a_k = 1.0;
  int outer_iters = 20;
  int wpm_max_iter = 20;
  double wpm_tol = 1e-6;
  TvVariant tv_variant = TvVariant::iso;
  Formulation formulation = Formulation::analysis;
  /// Defaults to default_wavelet_levels(size) when unset.
  std::optional<int> wavelet_levels;

  bool operator==(ExperimentConfig const &) const = default;
};

/// log2(size) - 3 clamped to [1, 5]: an 8 x 8 coarse block up to 256 x 256.
int default_wavelet_levels(int size);

/// Throws ConfigError if any field is out of range.
void validate(ExperimentConfig const &config);

/// Settings for one solver run of the experiment.
SolverConfig solver_config(ExperimentConfig const &config, Method method);

/// Parse `key = value` lines; `#` starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(std::filesystem::path const &path);
std::string emit_config(ExperimentConfig const &config);

/// Set one key from its textual value, as in a config line.
void apply_setting(ExperimentConfig &config, std::string_view key, std::string_view value);

std::vector<std::string_view> config_keys();

/// Shepp-Logan magnitude (max exactly 1) times a smooth phase that vanishes
/// at pixel (size/2, size/2) and stays within [-pi/2, pi/2].
ComplexImage make_phantom(int size);

/// Gaussian-profile coils centered on the image boundary at equispaced angles,
/// normalized so that sum_l |S_l|^2 = 1 at every pixel.
SensitivityMaps make_sensitivities(int size, int coils);

/// i.i.d. complex Gaussian noise; real and imaginary parts are N(0, variance / 2).
CVec complex_gaussian_noise(Index n, double variance, std::uint64_t seed);

struct Simulation {
  ComplexImage truth;
  ForwardModel model;
  KSpaceData data;
  double input_snr_db = 0.0;
};

Simulation simulate(ExperimentConfig const &config);

inline constexpr std::string_view kCsvHeader = "iter,time_s,cost,psnr,inner_iters";

std::string records_csv(std::vector<IterationRecord> const &records);

/// 8-byte magic, uint32 rows, uint32 cols, then real and imaginary planes as
/// little-endian float64 in row-major order.
void write_image(std::filesystem::path const &path, ComplexImage const &img);
ComplexImage read_image(std::filesystem::path const &path);

struct SolverRun {
  Method method = Method::cqnpm;
  std::string label;
  std::vector<IterationRecord> records;
  std::optional<ComplexImage> image;
  std::string error; // empty on success
  bool ok() const { return error.empty(); }
};

struct RunArtifact {
  ExperimentConfig config;
  double input_snr_db = 0.0;
  std::vector<SolverRun> runs;
  bool all_ok() const;
};

/// Run every configured method on one simulated data set. With an output
/// directory, writes <method><suffix>.csv, <method><suffix>.img and
/// manifest<suffix>.txt. A failing solver is recorded and the others still run.
RunArtifact run_experiment(ExperimentConfig const &config,
                           std::optional<std::filesystem::path> const &out_dir = std::nullopt,
                           std::string const &suffix = "");

} // namespace cqnp
