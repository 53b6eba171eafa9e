#pragma once

#include <cstdint>
#include <random>

#include "cqnp/types.hpp"

namespace cqnp {

/// Random complex vector with i.i.d. standard normal real and imaginary parts.
inline CVec random_cvec(Index n, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal;
  CVec v(n);
  for (Index i = 0; i < n; ++i) {
    double const re = normal(rng);
    double const im = normal(rng);
    v[i] = {re, im};
  }
  return v;
}

/// Largest eigenvalue of a Hermitian positive semidefinite operator by power
/// iteration; returns the final Rayleigh quotient.
template <class Op>
double power_iteration(Op &&op, CVec start, int iterations) {
  double norm = start.norm();
  if (norm == 0.0)
    return 0.0;
  CVec x = start / norm;
  double lambda = 0.0;
  for (int k = 0; k < iterations; ++k) {
    CVec y = op(x);
    lambda = inner(y, x).real();
    norm = y.norm();
    if (norm == 0.0)
      return 0.0;
    x = y / norm;
  }
  return lambda;
}

} // namespace cqnp
