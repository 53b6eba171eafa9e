#pragma once

// Complex symmetric rank-1 (SR1) Hessian approximation B = tau I + sign * u u^H.

#include "cqnp/types.hpp"

namespace cqnp {

struct SR1Settings {
  double gamma = 1.7; // must exceed 1
  double xi = 1.0;    // fallback scale for B = xi I
  double delta = 1e-8;
};

/// Hermitian metric tau I + sign * u_tilde u_tilde^H.
///
/// sign == 0 means a pure scaled identity and u_tilde is the zero vector.
/// Instances built through sr1_update or scaled_identity are positive definite.
class Rank1Metric {
public:
  Rank1Metric(Index dim, double tau, int sign, CVec u_tilde);

  static Rank1Metric scaled_identity(Index dim, double tau);

  Index dim() const { return dim_; }
  double tau() const { return tau_; }
  int sign() const { return sign_; }
  CVec const &u_tilde() const { return u_tilde_; }

  bool positive_definite() const;

  CVec apply(CVec const &v) const;

  /// Sherman-Morrison inverse; throws NotPositiveDefinite for an indefinite metric.
  CVec apply_inverse(CVec const &v) const;

  /// Closed-form smallest eigenvalue (tau for sign >= 0, tau - |u|^2 for sign < 0).
  double min_eigenvalue() const;

  /// Dense N x N matrix, for tests and small oracles.
  Eigen::MatrixXcd dense() const;

private:
  void check_dim(CVec const &v) const;

  Index dim_;
  double tau_;
  int sign_;
  CVec u_tilde_;
};

/// One step of complex SR1 from step s = x_k - x_{k-1} and gradient change m.
///
/// Inner products entering tau and the rank-1 denominator use their real part.
/// A nonpositive curvature Re<s, m> falls back to xi I.
Rank1Metric sr1_update(CVec const &s, CVec const &m, SR1Settings const &settings = {});

} // namespace cqnp
