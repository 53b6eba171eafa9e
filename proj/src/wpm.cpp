#include "cqnp/wpm.hpp"

#include <cmath>

namespace cqnp {

namespace {

void check_triple(WpmProblem const &problem, DualTriple const &triple) {
  Dims const d = problem.dims;
  if (problem.uses_wavelet() && triple.z.size() != d.size())
    throw std::invalid_argument("DualTriple: z must have one entry per wavelet coefficient");
  if (problem.uses_tv()) {
    bool const ok = triple.pair.P.rows() == d.rows - 1 && triple.pair.P.cols() == d.cols &&
                    triple.pair.Q.rows() == d.rows && triple.pair.Q.cols() == d.cols - 1;
    if (!ok)
      throw std::invalid_argument("DualTriple: (P, Q) shapes do not match the image");
  }
}

// a * x + b * y over the blocks in use.
DualTriple combine(WpmProblem const &problem, double a, DualTriple const &x, double b,
                   DualTriple const &y) {
  DualTriple out;
  if (problem.uses_wavelet())
    out.z = a * x.z + b * y.z;
  if (problem.uses_tv()) {
    out.pair.P = a * x.pair.P + b * y.pair.P;
    out.pair.Q = a * x.pair.Q + b * y.pair.Q;
  }
  return out;
}

double distance(WpmProblem const &problem, DualTriple const &x, DualTriple const &y) {
  double sq = 0.0;
  if (problem.uses_wavelet())
    sq += (x.z - y.z).squaredNorm();
  if (problem.uses_tv())
    sq += (x.pair.P - y.pair.P).squaredNorm() + (x.pair.Q - y.pair.Q).squaredNorm();
  return std::sqrt(sq);
}

Cx soft(Cx v, double threshold) {
  double const mag = std::abs(v);
  if (mag <= threshold)
    return {0.0, 0.0};
  return v * ((mag - threshold) / mag);
}

} // namespace

void validate(WpmProblem const &problem) {
  if (problem.dims.size() < 1 || problem.v.size() != problem.dims.size())
    throw std::invalid_argument("WpmProblem: v length must equal rows * cols");
  if (problem.metric.dim() != problem.v.size())
    throw std::invalid_argument("WpmProblem: metric dimension does not match v");
  if (!(problem.lambda_bar >= 0.0) || !std::isfinite(problem.lambda_bar))
    throw std::invalid_argument("WpmProblem: lambda_bar must be nonnegative");
  if (!(problem.alpha >= 0.0 && problem.alpha <= 1.0))
    throw std::invalid_argument("WpmProblem: alpha must lie in [0, 1]");
  if (problem.uses_wavelet())
    validate(problem.wavelet, problem.dims);
}

DualTriple zero_triple(WpmProblem const &problem) {
  DualTriple out;
  if (problem.uses_wavelet())
    out.z = CVec::Zero(problem.dims.size());
  if (problem.uses_tv())
    out.pair = DualPair::zeros(problem.dims);
  return out;
}

double wpm_objective(WpmProblem const &problem, CVec const &x) {
  validate(problem);
  CVec const diff = x - problem.v;
  double value = inner(problem.metric.apply(diff), diff).real();
  ComplexImage const img(problem.dims, x);
  double reg = 0.0;
  if (problem.uses_wavelet())
    reg += problem.alpha * wavelet_forward(img, problem.wavelet).cwiseAbs().sum();
  if (problem.uses_tv())
    reg += (1.0 - problem.alpha) * tv_value(img, problem.tv_variant);
  return value + 2.0 * problem.lambda_bar * reg;
}

CVec w_of(WpmProblem const &problem, DualTriple const &triple) {
  validate(problem);
  check_triple(problem, triple);
  if (problem.lambda_bar == 0.0)
    return problem.v;
  CVec r = CVec::Zero(problem.v.size());
  if (problem.uses_wavelet())
    r += problem.alpha * wavelet_adjoint(triple.z, problem.wavelet, problem.dims).data();
  if (problem.uses_tv())
    r += (1.0 - problem.alpha) * L_apply(triple.pair).data();
  return problem.v - problem.lambda_bar * problem.metric.apply_inverse(r);
}

DualTriple dual_gradient(WpmProblem const &problem, DualTriple const &triple) {
  ComplexImage const w(problem.dims, w_of(problem, triple));
  double const scale = -2.0 * problem.lambda_bar;
  DualTriple out;
  if (problem.uses_wavelet())
    out.z = scale * problem.alpha * wavelet_forward(w, problem.wavelet);
  if (problem.uses_tv()) {
    out.pair = L_adjoint(w);
    out.pair.P *= scale * (1.0 - problem.alpha);
    out.pair.Q *= scale * (1.0 - problem.alpha);
  }
  return out;
}

double dual_lipschitz(WpmProblem const &problem) {
  validate(problem);
  double const a = problem.alpha;
  double const wavelet_norm_sq = 1.0; // orthonormal family
  double const diff_norm_sq = 8.0;    // ||L||^2
  double const coupling = a * a * wavelet_norm_sq + diff_norm_sq * (1.0 - a) * (1.0 - a);
  return 2.0 * problem.lambda_bar * problem.lambda_bar * coupling /
         problem.metric.min_eigenvalue();
}

WpmResult solve_dual_fista(WpmProblem const &problem, WpmSettings const &settings) {
  validate(problem);
  if (settings.max_iter < 1 || !(settings.tol > 0.0))
    throw std::invalid_argument("WpmSettings: need max_iter >= 1 and tol > 0");

  DualTriple current = settings.warm_start ? *settings.warm_start : zero_triple(problem);
  check_triple(problem, current);
  if (problem.lambda_bar == 0.0)
    return {problem.v, std::move(current), 0};

  double const lc = dual_lipschitz(problem);
  double const z_step = 2.0 * problem.lambda_bar * problem.alpha / lc;
  double const pair_step = 2.0 * problem.lambda_bar * (1.0 - problem.alpha) / lc;

  DualTriple extrapolated = current;
  double t = 1.0;
  int iterations = 0;
  for (int s = 1; s <= settings.max_iter; ++s) {
    iterations = s;
    ComplexImage const w(problem.dims, w_of(problem, extrapolated));
    DualTriple next;
    if (problem.uses_wavelet())
      next.z = proj_Z(extrapolated.z + z_step * wavelet_forward(w, problem.wavelet));
    if (problem.uses_tv()) {
      DualPair ascent = L_adjoint(w);
      ascent.P = extrapolated.pair.P + pair_step * ascent.P;
      ascent.Q = extrapolated.pair.Q + pair_step * ascent.Q;
      next.pair = proj_P(ascent, problem.tv_variant);
    }
    bool const converged = distance(problem, next, current) <= settings.tol;
    if (converged) {
      current = std::move(next);
      break;
    }
    double const t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    extrapolated = combine(problem, (t_next + t - 1.0) / t_next, next, -(t - 1.0) / t_next, current);
    current = std::move(next);
    t = t_next;
  }
  CVec x = w_of(problem, current);
  return {std::move(x), std::move(current), iterations};
}

CVec prox_l1_diag(CVec const &x, RVec const &thresholds) {
  if (thresholds.size() != x.size())
    throw std::invalid_argument("prox_l1_diag: one threshold per entry is required");
  if (!(thresholds.array() > 0.0).all())
    throw std::invalid_argument("prox_l1_diag: thresholds must be positive");
  CVec out(x.size());
  for (Index n = 0; n < x.size(); ++n)
    out[n] = soft(x[n], thresholds[n]);
  return out;
}

CVec prox_l1_diag(CVec const &x, double threshold) {
  return prox_l1_diag(x, RVec::Constant(x.size(), threshold));
}

RootResult solve_rank1_root(CVec const &x, Rank1Metric const &metric, double lambda_bar) {
  if (x.size() != metric.dim())
    throw std::invalid_argument("solve_rank1_root: x length does not match the metric");
  if (!(lambda_bar > 0.0))
    throw std::invalid_argument("solve_rank1_root: lambda_bar must be positive");
  if (!metric.positive_definite())
    throw NotPositiveDefinite("solve_rank1_root: metric is not positive definite");

  double const tau = metric.tau();
  double const threshold = lambda_bar / tau;
  auto const shrink = [&](CVec const &p) {
    CVec out(p.size());
    for (Index n = 0; n < p.size(); ++n)
      out[n] = soft(p[n], threshold);
    return out;
  };
  if (metric.sign() == 0)
    return {shrink(x), Cx{}, 0, 0.0};

  CVec const &u = metric.u_tilde();
  double const sign = static_cast<double>(metric.sign());
  CVec const shift_dir = (sign / tau) * u;

  using Vec2 = Eigen::Vector2d;
  using Mat2 = Eigen::Matrix2d;
  auto const evaluate = [&](Vec2 const &b) {
    Cx const beta(b[0], b[1]);
    CVec const p = shrink(x - beta * shift_dir);
    Cx const j = u.dot(x - p) + beta;
    return Vec2(j.real(), j.imag());
  };

  // J' = I + (sign / tau) sum_n |u_n|^2 R_n^T D_n R_n with 0 <= D_n <= I; the
  // active-set count gives a scalar starting guess for the secant Jacobian.
  auto const scalar_jacobian = [&](Vec2 const &b) {
    Cx const beta(b[0], b[1]);
    CVec const p = x - beta * shift_dir;
    double active = 0.0;
    for (Index n = 0; n < p.size(); ++n)
      if (std::abs(p[n]) > threshold)
        active += std::norm(u[n]);
    double diag = 1.0 + sign * active / tau;
    return Mat2(Mat2::Identity() * std::max(diag, 1e-12));
  };

  double const tol = kRootTol * std::max(1.0, u.norm() * x.norm());
  Vec2 b = Vec2::Zero();
  Vec2 f = evaluate(b);
  Mat2 jac = scalar_jacobian(b);
  double best = f.norm();
  int it = 0;
  while (f.norm() > tol) {
    if (it == kRootMaxIter)
      throw ConvergenceFailure("solve_rank1_root: root iteration did not converge", best);
    ++it;
    Vec2 step = -jac.fullPivLu().solve(f);
    if (!step.allFinite()) {
      jac = scalar_jacobian(b);
      step = -jac.fullPivLu().solve(f);
    }
    // Damping: halve until the residual decreases; otherwise take the full
    // step from a refreshed Jacobian so the secant model can recover.
    double damp = 1.0;
    Vec2 b_new = b + step;
    Vec2 f_new = evaluate(b_new);
    int halvings = 0;
    while (f_new.norm() >= (1.0 - 1e-4 * damp) * f.norm() && halvings < 30) {
      damp *= 0.5;
      b_new = b + damp * step;
      f_new = evaluate(b_new);
      ++halvings;
    }
    if (halvings == 30) {
      jac = scalar_jacobian(b);
      b_new = b - jac.fullPivLu().solve(f);
      f_new = evaluate(b_new);
    }
    Vec2 const db = b_new - b;
    Vec2 const df = f_new - f;
    double const db_sq = db.squaredNorm();
    if (db_sq > 0.0)
      jac += ((df - jac * db) * db.transpose()) / db_sq;
    b = b_new;
    f = f_new;
    best = std::min(best, f.norm());
  }
  Cx const beta(b[0], b[1]);
  return {shrink(x - beta * shift_dir), beta, it, f.norm()};
}

} // namespace cqnp
