#pragma once

// Shared helpers for the test binaries: random instances and dense oracles
// that do not go through the library's operator code.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "cqnp/linalg.hpp"
#include "cqnp/metric.hpp"
#include "cqnp/transforms.hpp"
#include "cqnp/types.hpp"

namespace cqnp::test {

using Dense = Eigen::MatrixXcd;

inline ComplexImage random_image(Dims d, std::mt19937_64 &rng) {
  return ComplexImage(d, random_cvec(d.size(), rng));
}

inline DualPair random_pair(Dims d, std::mt19937_64 &rng) {
  DualPair p = DualPair::zeros(d);
  p.P = CMat::Map(random_cvec(p.P.size(), rng).data(), p.P.rows(), p.P.cols());
  p.Q = CMat::Map(random_cvec(p.Q.size(), rng).data(), p.Q.rows(), p.Q.cols());
  return p;
}

inline Cx pair_inner(DualPair const &a, DualPair const &b) {
  return (b.P.conjugate().cwiseProduct(a.P)).sum() + (b.Q.conjugate().cwiseProduct(a.Q)).sum();
}

inline double uniform(std::mt19937_64 &rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random Hermitian matrix with eigenvalues drawn from [lo, hi].
inline Dense random_hermitian(Index n, double lo, double hi, std::mt19937_64 &rng) {
  Dense g(n, n);
  for (Index j = 0; j < n; ++j)
    g.col(j) = random_cvec(n, rng);
  Eigen::HouseholderQR<Dense> qr(g);
  Dense const q = qr.householderQ();
  Eigen::VectorXd eig(n);
  for (Index i = 0; i < n; ++i)
    eig[i] = uniform(rng, lo, hi);
  return q * eig.asDiagonal() * q.adjoint();
}

/// SR1 metric built from a quadratic model m = G s with spectrum in [lo, hi].
inline Rank1Metric random_sr1_metric(Index n, std::mt19937_64 &rng, double gamma = 1.7,
                                     double lo = 1.0, double hi = 4.0) {
  Dense const g = random_hermitian(n, lo, hi, rng);
  CVec const s = random_cvec(n, rng);
  return sr1_update(s, g * s, SR1Settings{gamma, 1.0, 1e-8});
}

/// 1-D orthonormal Haar analysis matrix of size n (n even): averages on top, details below.
inline Eigen::MatrixXd haar_1d(Index n) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  double const r = 1.0 / std::sqrt(2.0);
  for (Index k = 0; k < n / 2; ++k) {
    h(k, 2 * k) = r;
    h(k, 2 * k + 1) = r;
    h(n / 2 + k, 2 * k) = r;
    h(n / 2 + k, 2 * k + 1) = -r;
  }
  return h;
}

/// Dense multi-level 2-D Haar matrix acting on row-major vec(X). Level l
/// transforms the top-left block with H_rows (x) H_cols and leaves the rest.
inline Eigen::MatrixXd haar_2d(Dims d, int levels) {
  Index const n = d.size();
  Eigen::MatrixXd total = Eigen::MatrixXd::Identity(n, n);
  Index h = d.rows;
  Index w = d.cols;
  for (int l = 0; l < levels; ++l) {
    Eigen::MatrixXd const hr = haar_1d(h);
    Eigen::MatrixXd const hc = haar_1d(w);
    Eigen::MatrixXd level = Eigen::MatrixXd::Identity(n, n);
    for (Index r = 0; r < h; ++r)
      for (Index c = 0; c < w; ++c) {
        Index const row = r * d.cols + c;
        for (Index r2 = 0; r2 < h; ++r2)
          for (Index c2 = 0; c2 < w; ++c2)
            level(row, r2 * d.cols + c2) = hr(r, r2) * hc(c, c2);
      }
    total = level * total;
    h /= 2;
    w /= 2;
  }
  return total;
}

/// Dense forward differences stacked as [P; Q] in row-major order:
/// P_ij = X_ij - X_{i+1,j} ((I-1) x J), Q_ij = X_ij - X_{i,j+1} (I x (J-1)).
inline Eigen::MatrixXd differences(Dims d) {
  Index const np = (d.rows - 1) * d.cols;
  Index const nq = d.rows * (d.cols - 1);
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(np + nq, d.size());
  for (Index i = 0; i + 1 < d.rows; ++i)
    for (Index j = 0; j < d.cols; ++j) {
      k(i * d.cols + j, i * d.cols + j) = 1.0;
      k(i * d.cols + j, (i + 1) * d.cols + j) = -1.0;
    }
  for (Index i = 0; i < d.rows; ++i)
    for (Index j = 0; j + 1 < d.cols; ++j) {
      Index const row = np + i * (d.cols - 1) + j;
      k(row, i * d.cols + j) = 1.0;
      k(row, i * d.cols + j + 1) = -1.0;
    }
  return k;
}

/// Groups of rows of the stacked [P; Q] differences whose joint magnitude
/// forms the TV: pairs at interior pixels for iso, singletons otherwise.
inline std::vector<std::vector<Index>> tv_groups(Dims d, TvVariant variant) {
  Index const np = (d.rows - 1) * d.cols;
  std::vector<std::vector<Index>> groups;
  std::vector<bool> used(static_cast<std::size_t>(np + d.rows * (d.cols - 1)), false);
  if (variant == TvVariant::iso) {
    for (Index i = 0; i + 1 < d.rows; ++i)
      for (Index j = 0; j + 1 < d.cols; ++j) {
        Index const p = i * d.cols + j;
        Index const q = np + i * (d.cols - 1) + j;
        groups.push_back({p, q});
        used[static_cast<std::size_t>(p)] = used[static_cast<std::size_t>(q)] = true;
      }
  }
  for (Index r = 0; r < static_cast<Index>(used.size()); ++r)
    if (!used[static_cast<std::size_t>(r)])
      groups.push_back({r});
  return groups;
}

/// Weighted group l1 regularizer sum_g weight_g ||(K x)_g||.
struct GroupL1 {
  Dense K;
  std::vector<std::vector<Index>> groups;
  std::vector<double> weights;

  double value(CVec const &x) const {
    CVec const t = K * x;
    double total = 0.0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      double sq = 0.0;
      for (Index r : groups[g])
        sq += std::norm(t[r]);
      total += weights[g] * std::sqrt(sq);
    }
    return total;
  }
};

/// The WPM regularizer alpha ||T x||_1 + (1 - alpha) TV(x) built from the
/// dense Haar and difference matrices.
inline GroupL1 wpm_regularizer(Dims d, int levels, double alpha, TvVariant variant) {
  GroupL1 reg;
  Index rows = 0;
  Eigen::MatrixXd t, k;
  if (alpha != 0.0) {
    t = haar_2d(d, levels);
    rows += t.rows();
  }
  if (alpha != 1.0) {
    k = differences(d);
    rows += k.rows();
  }
  Eigen::MatrixXd stacked(rows, d.size());
  Index offset = 0;
  if (alpha != 0.0) {
    stacked.topRows(t.rows()) = t;
    for (Index r = 0; r < t.rows(); ++r) {
      reg.groups.push_back({r});
      reg.weights.push_back(alpha);
    }
    offset = t.rows();
  }
  if (alpha != 1.0) {
    stacked.bottomRows(k.rows()) = k;
    for (auto g : tv_groups(d, variant)) {
      for (Index &r : g)
        r += offset;
      reg.groups.push_back(g);
      reg.weights.push_back(1.0 - alpha);
    }
  }
  reg.K = stacked.cast<Cx>();
  return reg;
}

/// ||x - v||_B^2 + 2 lambda_bar reg(x), with B given densely.
inline double primal_objective(Dense const &b, CVec const &v, double lambda_bar,
                               GroupL1 const &reg, CVec const &x) {
  CVec const d = x - v;
  return d.dot(b * d).real() + 2.0 * lambda_bar * reg.value(x);
}

/// ADMM on x - z = 0 splitting of the primal WPM with z = K x:
///   min ||x - v||_B^2 + 2 lambda_bar sum_g w_g ||z_g||.
inline CVec admm_wpm(Dense const &b, CVec const &v, double lambda_bar, GroupL1 const &reg,
                     int iterations, double rho = 1.0) {
  Dense const &k = reg.K;
  Dense const system = 2.0 * b + rho * k.adjoint() * k;
  Eigen::LDLT<Dense> const solver(system);
  CVec const bv = 2.0 * b * v;
  CVec x = v;
  CVec z = k * x;
  CVec u = CVec::Zero(z.size());
  for (int it = 0; it < iterations; ++it) {
    x = solver.solve(bv + rho * k.adjoint() * (z - u));
    CVec const kx = k * x;
    CVec const target = kx + u;
    for (std::size_t g = 0; g < reg.groups.size(); ++g) {
      double sq = 0.0;
      for (Index r : reg.groups[g])
        sq += std::norm(target[r]);
      double const mag = std::sqrt(sq);
      double const thr = 2.0 * lambda_bar * reg.weights[g] / rho;
      double const scale = mag > thr ? (mag - thr) / mag : 0.0;
      for (Index r : reg.groups[g])
        z[r] = scale * target[r];
    }
    u += kx - z;
  }
  return x;
}

/// Central difference of f along d treating real and imaginary parts as
/// independent real variables.
template <class F>
double central_difference(F &&f, CVec const &x, CVec const &d, double h = 1e-6) {
  return (f(CVec(x + h * d)) - f(CVec(x - h * d))) / (2.0 * h);
}

} // namespace cqnp::test
