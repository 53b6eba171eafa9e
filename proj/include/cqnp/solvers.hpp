#pragma once

// Outer loops for
//
//   min_x 1/2 ||Ax - y||^2 + lambda (alpha ||Tx||_1 + (1 - alpha) TV(x)):
//
// the complex quasi-Newton proximal method (CQNPM), the accelerated proximal
// method (APM / FISTA), and their partially smoothed variants in which the
// wavelet term is replaced by sqrt(|t|^2 + eta) and moved into the smooth part.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cqnp/operators.hpp"
#include "cqnp/transforms.hpp"
#include "cqnp/wpm.hpp"

namespace cqnp {

enum class Method { cqnpm, apm, s_cqnpm, s_apm };
enum class Formulation { analysis, synthesis };

std::string_view to_string(Method m);
std::string_view to_string(Formulation f);
std::string_view to_string(TvVariant v);
Method parse_method(std::string_view s);
Formulation parse_formulation(std::string_view s);
TvVariant parse_tv_variant(std::string_view s);

struct BacktrackingParams {
  double rho = 0.5;
  int max_halvings = 60;
};

struct SolverConfig {
  Method method = Method::cqnpm;
  Formulation formulation = Formulation::analysis;
  double lambda = 5e-4;
  double alpha = 1.0;
  double eta = 1e-5;
  double gamma = 1.7;
  double xi = 1.0;
  double step = 1.0; // a_k
  int outer_iters = 20;
  int wpm_max_iter = 20;
  double wpm_tol = 1e-6;
  TvVariant tv_variant = TvVariant::iso;
  WaveletSpec wavelet{WaveletFamily::haar, 3};
  BacktrackingParams backtracking{};
  // Power iteration for the APM Lipschitz constant of A^H A.
  int power_iters = 100;
  double lipschitz_safety = 1.01;
  // false pins B = xi I at every CQNPM iteration.
  bool sr1 = true;
};

/// Throws std::invalid_argument for inconsistent settings.
void validate(SolverConfig const &config);

struct IterationRecord {
  int iter = 0;
  double seconds = 0.0;
  double cost = 0.0;
  double psnr = 0.0;
  int inner_iters = 0;
};

struct SolveOptions {
  /// Starting image; defaults to A^H y.
  std::optional<ComplexImage> initial;
  /// Ground truth for the PSNR column; NaN when absent.
  std::optional<ComplexImage> reference;
  /// Called with (iteration, image) for the initial point and every outer iterate.
  std::function<void(int, ComplexImage const &)> on_iterate;
};

struct SolveResult {
  ComplexImage image;
  std::vector<IterationRecord> records;
};

/// 1/2 ||Ax - y||^2 + lambda (alpha ||Tx||_1 + (1 - alpha) TV(x))
double cost(ForwardModel const &model, ComplexImage const &img, KSpaceData const &data,
            double lambda, double alpha, TvVariant tv_variant, WaveletSpec const &wavelet);

/// PSNR in dB on magnitudes with unit peak, capped at kPsnrCap.
double psnr(ComplexImage const &reference, ComplexImage const &estimate);
inline constexpr double kPsnrCap = 300.0;

/// Largest eigenvalue of A^H A by deterministic power iteration.
double estimate_lipschitz(ForwardModel const &model, int iterations);

SolveResult run_cqnpm(ForwardModel const &model, KSpaceData const &data,
                      SolverConfig const &config, SolveOptions const &options = {});
SolveResult run_apm(ForwardModel const &model, KSpaceData const &data,
                    SolverConfig const &config, SolveOptions const &options = {});
SolveResult run_partial_smoothing(ForwardModel const &model, KSpaceData const &data,
                                  SolverConfig const &config, SolveOptions const &options = {});

/// Dispatch on config.method.
SolveResult solve(ForwardModel const &model, KSpaceData const &data, SolverConfig const &config,
                  SolveOptions const &options = {});

} // namespace cqnp
