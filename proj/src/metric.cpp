#include "cqnp/metric.hpp"

#include <cmath>

namespace cqnp {

Rank1Metric::Rank1Metric(Index dim, double tau, int sign, CVec u_tilde)
    : dim_(dim), tau_(tau), sign_(sign), u_tilde_(std::move(u_tilde)) {
  if (dim < 1)
    throw std::invalid_argument("Rank1Metric: dimension must be positive");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw std::invalid_argument("Rank1Metric: tau must be positive and finite");
  if (sign < -1 || sign > 1)
    throw std::invalid_argument("Rank1Metric: sign must be -1, 0 or +1");
  if (sign == 0)
    u_tilde_ = CVec::Zero(dim);
  if (u_tilde_.size() != dim)
    throw std::invalid_argument("Rank1Metric: u_tilde length must equal the dimension");
  if (!u_tilde_.allFinite())
    throw std::invalid_argument("Rank1Metric: u_tilde must be finite");
}

Rank1Metric Rank1Metric::scaled_identity(Index dim, double tau) {
  return Rank1Metric(dim, tau, 0, CVec::Zero(dim));
}

bool Rank1Metric::positive_definite() const {
  return sign_ >= 0 || tau_ - u_tilde_.squaredNorm() > 0.0;
}

void Rank1Metric::check_dim(CVec const &v) const {
  if (v.size() != dim_)
    throw std::invalid_argument("Rank1Metric: vector length does not match the metric");
}

CVec Rank1Metric::apply(CVec const &v) const {
  check_dim(v);
  if (sign_ == 0)
    return tau_ * v;
  return tau_ * v + static_cast<double>(sign_) * u_tilde_.dot(v) * u_tilde_;
}

CVec Rank1Metric::apply_inverse(CVec const &v) const {
  check_dim(v);
  if (!positive_definite())
    throw NotPositiveDefinite("Rank1Metric: tau - |u|^2 <= 0, metric is not positive definite");
  if (sign_ == 0)
    return v / tau_;
  double const s = static_cast<double>(sign_);
  double const denom = tau_ * tau_ * (1.0 + s * u_tilde_.squaredNorm() / tau_);
  return v / tau_ - (s / denom) * u_tilde_.dot(v) * u_tilde_;
}

double Rank1Metric::min_eigenvalue() const {
  if (!positive_definite())
    throw NotPositiveDefinite("Rank1Metric: tau - |u|^2 <= 0, metric is not positive definite");
  return sign_ < 0 ? tau_ - u_tilde_.squaredNorm() : tau_;
}

Eigen::MatrixXcd Rank1Metric::dense() const {
  Eigen::MatrixXcd b = tau_ * Eigen::MatrixXcd::Identity(dim_, dim_);
  if (sign_ != 0)
    b += static_cast<double>(sign_) * u_tilde_ * u_tilde_.adjoint();
  return b;
}

Rank1Metric sr1_update(CVec const &s, CVec const &m, SR1Settings const &settings) {
  if (s.size() != m.size())
    throw std::invalid_argument("sr1_update: s and m must have equal lengths");
  if (!(settings.gamma > 1.0))
    throw std::invalid_argument("sr1_update: gamma must exceed 1");
  if (!(settings.xi > 0.0))
    throw std::invalid_argument("sr1_update: xi must be positive");
  Index const n = s.size();
  auto const fallback = Rank1Metric::scaled_identity(n, settings.xi);

  double const curvature = inner(s, m).real();
  double const m_sq = m.squaredNorm();
  if (!(curvature > 0.0) || !(m_sq > 0.0))
    return fallback;
  double const tau = settings.gamma * m_sq / curvature;
  if (!std::isfinite(tau))
    return fallback;

  CVec u = m - tau * s;
  Cx const us = inner(u, s);
  if (std::abs(us) <= settings.delta * s.norm() * u.norm())
    return Rank1Metric::scaled_identity(n, tau);
  double const denom = us.real();
  if (denom == 0.0)
    return Rank1Metric::scaled_identity(n, tau);
  int const sign = denom > 0.0 ? 1 : -1;
  u /= std::sqrt(std::abs(denom));
  return Rank1Metric(n, tau, sign, std::move(u));
}

} // namespace cqnp
