#pragma once

// Sparsifying transforms: orthonormal Haar wavelets, discrete total variation
// with its difference operator pair (L, L^T), projections onto the dual
// feasible sets, and the smoothed l1 surrogate.

#include "cqnp/types.hpp"

namespace cqnp {

enum class WaveletFamily { haar };

struct WaveletSpec {
  WaveletFamily family = WaveletFamily::haar;
  int levels = 1;
};

/// Throws std::invalid_argument unless both dims are divisible by 2^levels.
void validate(WaveletSpec const &spec, Dims dims);

/// Multi-level separable orthonormal Haar analysis in Mallat layout.
/// The coefficient vector has the image's size and row-major ordering;
/// the coarsest approximation block sits in the top-left corner.
CVec wavelet_forward(ComplexImage const &img, WaveletSpec const &spec);

/// Synthesis; the exact inverse and adjoint of wavelet_forward.
ComplexImage wavelet_adjoint(CVec const &coeffs, WaveletSpec const &spec, Dims dims);

enum class TvVariant { iso, l1 };

/// Discrete TV with zero Neumann boundary. Differences are complex, so the
/// isotropic form uses sqrt(|dv|^2 + |dh|^2).
double tv_value(ComplexImage const &img, TvVariant variant);

/// (P, Q) with P of shape (I-1) x J and Q of shape I x (J-1).
struct DualPair {
  CMat P;
  CMat Q;

  static DualPair zeros(Dims dims);
  bool empty() const { return P.size() == 0 && Q.size() == 0; }
  /// Image dims implied by the shapes.
  Dims image_dims() const { return {Q.rows(), P.cols()}; }
  double squared_norm() const { return P.squaredNorm() + Q.squaredNorm(); }
};

/// L(P,Q)_{i,j} = P_{i,j} + Q_{i,j} - P_{i-1,j} - Q_{i,j-1}; out-of-range entries are zero.
ComplexImage L_apply(DualPair const &pair);

/// L^T(X) = (vertical differences, horizontal differences).
DualPair L_adjoint(ComplexImage const &img);

/// Componentwise projection onto the closed unit disk.
CVec proj_Z(CVec const &z);

/// Projection onto P1 (iso: joint disks on interior pairs) or P2 (l1: independent disks).
DualPair proj_P(DualPair const &pair, TvVariant variant);

struct SmoothedL1 {
  double value = 0.0;
  CVec grad;
};

/// sum_n sqrt(|t_n|^2 + eta) and its gradient t_n / sqrt(|t_n|^2 + eta).
SmoothedL1 smoothed_l1(CVec const &coeffs, double eta);

} // namespace cqnp
