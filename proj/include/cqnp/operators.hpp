#pragma once

// Simulated multi-coil non-Cartesian MRI forward model.
//
// A = [A_1; ...; A_L] with A_l = F S_l, where F is an exact non-uniform DFT
// normalized by 1/sqrt(I*J) and S_l is a pointwise coil sensitivity. The
// acquisition mask is the identity: the trajectory lists exactly the acquired
// samples.

#include <memory>
#include <vector>

#include "cqnp/types.hpp"

namespace cqnp {

struct KPoint {
  double kx = 0.0; // radians / pixel, pairs with the column index
  double ky = 0.0; // radians / pixel, pairs with the row index
};

/// Ordered k-space sample locations, each coordinate in [-pi, pi].
class Trajectory {
public:
  Trajectory() = default;
  explicit Trajectory(std::vector<KPoint> points);

  Index size() const { return static_cast<Index>(points_.size()); }
  std::vector<KPoint> const &points() const { return points_; }
  KPoint const &operator[](Index m) const { return points_[static_cast<std::size_t>(m)]; }

private:
  std::vector<KPoint> points_;
};

/// Equispaced spoke angles over [0, pi); readout radii span [-pi, pi(1 - 2/n_readout)].
Trajectory make_radial_trajectory(int n_spokes, int n_readout);

/// Archimedean spiral with 8 turns per interleave, radius growing linearly to pi.
Trajectory make_spiral_trajectory(int n_interleaves, int n_readout);

inline constexpr int kSpiralTurns = 8;

/// Precomputed separable phase tables for one (trajectory, image size) pair.
///
/// sample m = sum_{r,c} x[r,c] e^{-i ky r} e^{-i kx c} / sqrt(I J) is evaluated
/// as a dense product against the row and column tables, so repeated
/// applications cost one matrix product each and no transcendental calls.
class NudftPlan {
public:
  NudftPlan(Trajectory const &traj, Dims dims);

  Dims dims() const { return dims_; }
  Index samples() const { return row_phase_.rows(); }

  CVec forward(ComplexImage const &img) const;
  ComplexImage adjoint(CVec const &samples) const;

private:
  Dims dims_;
  // M x I and M x J, column-major for the GEMM calls; the 1/sqrt(IJ) factor
  // is folded into row_phase_.
  Eigen::MatrixXcd row_phase_;
  Eigen::MatrixXcd col_phase_;
};

CVec nudft_forward(ComplexImage const &img, Trajectory const &traj);
ComplexImage nudft_adjoint(CVec const &samples, Trajectory const &traj, Dims dims);

/// L coil sensitivity grids sharing the image dimensions.
class SensitivityMaps {
public:
  SensitivityMaps() = default;
  explicit SensitivityMaps(std::vector<ComplexImage> maps);

  /// One coil with S == 1.
  static SensitivityMaps unit(Dims dims);

  Index coils() const { return static_cast<Index>(maps_.size()); }
  Dims dims() const { return maps_.front().dims(); }
  ComplexImage const &operator[](Index l) const { return maps_[static_cast<std::size_t>(l)]; }
  std::vector<ComplexImage> const &maps() const { return maps_; }

private:
  std::vector<ComplexImage> maps_;
};

/// Coil-major measurement vector: block l holds the M samples of coil l.
struct KSpaceData {
  CVec samples;
  Index size() const { return samples.size(); }
};

class ForwardModel {
public:
  ForwardModel(Trajectory traj, SensitivityMaps maps);

  Dims dims() const { return maps_.dims(); }
  Index samples_per_coil() const { return traj_.size(); }
  Index coils() const { return maps_.coils(); }
  Index data_size() const { return samples_per_coil() * coils(); }

  Trajectory const &trajectory() const { return traj_; }
  SensitivityMaps const &maps() const { return maps_; }

  KSpaceData forward(ComplexImage const &img) const;
  ComplexImage adjoint(KSpaceData const &data) const;

  /// A^H A x without materializing the intermediate data.
  ComplexImage normal(ComplexImage const &img) const;

private:
  Trajectory traj_;
  SensitivityMaps maps_;
  std::shared_ptr<NudftPlan const> plan_;
};

inline KSpaceData forward(ForwardModel const &model, ComplexImage const &img) {
  return model.forward(img);
}
inline ComplexImage adjoint(ForwardModel const &model, KSpaceData const &data) {
  return model.adjoint(data);
}

struct FidelityGrad {
  double value = 0.0;
  ComplexImage grad;
  CVec residual; // A x - y
};

/// f(x) = 1/2 ||Ax - y||^2 and its gradient A^H (Ax - y).
///
/// The gradient follows the convention that the directional derivative of f
/// along d is Re<grad, d>.
FidelityGrad fidelity_grad(ForwardModel const &model, ComplexImage const &img,
                           KSpaceData const &data);

} // namespace cqnp
