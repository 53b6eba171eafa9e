#pragma once

// Weighted proximal mappings
//
//   prox^B_{lambda_bar h}(v) = argmin_x ||x - v||_B^2 + 2 lambda_bar h(x),
//   h(x) = alpha ||T x||_1 + (1 - alpha) TV(x),
//
// for a diagonal +/- rank-1 metric B. The coupled regularizer is handled by
// FISTA on the dual variables (z, P, Q); the pure l1 case reduces to a single
// complex root of a monotone scalar equation.

#include <optional>

#include "cqnp/metric.hpp"
#include "cqnp/transforms.hpp"

namespace cqnp {

/// Dual variables: z pairs with the wavelet term, (P, Q) with TV. A block not
/// used by the problem's alpha is empty.
struct DualTriple {
  CVec z;
  DualPair pair;
};

struct WpmProblem {
  CVec v;
  Rank1Metric metric;
  double lambda_bar = 0.0;
  double alpha = 1.0;
  TvVariant tv_variant = TvVariant::iso;
  WaveletSpec wavelet{};
  Dims dims{};

  bool uses_wavelet() const { return alpha != 0.0; }
  bool uses_tv() const { return alpha != 1.0; }
};

struct WpmSettings {
  int max_iter = 20;
  double tol = 1e-6;
  std::optional<DualTriple> warm_start;
};

struct WpmResult {
  CVec x;
  DualTriple triple;
  int iterations = 0;
};

/// Throws std::invalid_argument if the problem is malformed.
void validate(WpmProblem const &problem);

DualTriple zero_triple(WpmProblem const &problem);

/// ||x - v||_B^2 + 2 lambda_bar (alpha ||Tx||_1 + (1 - alpha) TV(x))
double wpm_objective(WpmProblem const &problem, CVec const &x);

/// w(z, P, Q) = v - lambda_bar B^{-1} (alpha T^H z + (1 - alpha) vec(L(P, Q)))
CVec w_of(WpmProblem const &problem, DualTriple const &triple);

/// Gradient of ||w(z, P, Q)||_B^2 with respect to the real and imaginary parts
/// of the dual variables: (-2 lambda_bar alpha T w, -2 lambda_bar (1 - alpha) L^T w).
DualTriple dual_gradient(WpmProblem const &problem, DualTriple const &triple);

/// Upper bound on the Lipschitz constant of dual_gradient:
/// 2 lambda_bar^2 (alpha^2 ||T||^2 + 8 (1 - alpha)^2) / lambda_min(B).
double dual_lipschitz(WpmProblem const &problem);

/// Projected FISTA on the dual. Stops after max_iter iterations or once the
/// Euclidean norm of the dual increment drops to tol; x is w at the last iterate.
WpmResult solve_dual_fista(WpmProblem const &problem, WpmSettings const &settings = {});

/// Componentwise complex soft threshold: x_n / |x_n| * max(|x_n| - thresholds_n, 0).
CVec prox_l1_diag(CVec const &x, RVec const &thresholds);
CVec prox_l1_diag(CVec const &x, double threshold);

struct RootResult {
  CVec x;
  Cx beta{};
  int iterations = 0;
  double residual = 0.0;
};

inline constexpr int kRootMaxIter = 200;
inline constexpr double kRootTol = 1e-10;

/// prox^B_{lambda_bar ||.||_1}(x) for B = tau I + sign u u^H.
///
/// Finds beta with J(beta) = u^H (x - prox^{tau I}(x - sign u beta / tau)) + beta = 0
/// by a damped Broyden iteration on (Re beta, Im beta), starting at beta = 0, and
/// returns prox^{tau I}(x - sign u beta / tau). Throws ConvergenceFailure after
/// kRootMaxIter iterations.
RootResult solve_rank1_root(CVec const &x, Rank1Metric const &metric, double lambda_bar);

} // namespace cqnp
