#include "cqnp/operators.hpp"

#include <cmath>
#include <numbers>

namespace cqnp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kCoordSlack = 1e-12;

} // namespace

Trajectory::Trajectory(std::vector<KPoint> points) : points_(std::move(points)) {
  if (points_.empty())
    throw std::invalid_argument("Trajectory: at least one sample is required");
  for (auto const &p : points_) {
    bool const ok = std::isfinite(p.kx) && std::isfinite(p.ky) &&
                    std::abs(p.kx) <= kPi + kCoordSlack && std::abs(p.ky) <= kPi + kCoordSlack;
    if (!ok)
      throw std::invalid_argument("Trajectory: coordinates must lie in [-pi, pi]");
  }
}

Trajectory make_radial_trajectory(int n_spokes, int n_readout) {
  if (n_spokes < 1 || n_readout < 2)
    throw std::invalid_argument("make_radial_trajectory: need n_spokes >= 1 and n_readout >= 2");
  std::vector<KPoint> pts;
  pts.reserve(static_cast<std::size_t>(n_spokes) * static_cast<std::size_t>(n_readout));
  for (int s = 0; s < n_spokes; ++s) {
    double const theta = s * kPi / n_spokes;
    double const cs = std::cos(theta);
    double const sn = std::sin(theta);
    for (int t = 0; t < n_readout; ++t) {
      double const radius = -kPi + 2.0 * kPi * t / n_readout;
      pts.push_back({radius * cs, radius * sn});
    }
  }
  return Trajectory(std::move(pts));
}

Trajectory make_spiral_trajectory(int n_interleaves, int n_readout) {
  if (n_interleaves < 1 || n_readout < 2)
    throw std::invalid_argument(
        "make_spiral_trajectory: need n_interleaves >= 1 and n_readout >= 2");
  std::vector<KPoint> pts;
  pts.reserve(static_cast<std::size_t>(n_interleaves) * static_cast<std::size_t>(n_readout));
  for (int m = 0; m < n_interleaves; ++m) {
    double const offset = 2.0 * kPi * m / n_interleaves;
    for (int t = 0; t < n_readout; ++t) {
      double const frac = static_cast<double>(t) / (n_readout - 1);
      double const radius = kPi * frac;
      double const phi = 2.0 * kPi * kSpiralTurns * frac + offset;
      pts.push_back({radius * std::cos(phi), radius * std::sin(phi)});
    }
  }
  return Trajectory(std::move(pts));
}

NudftPlan::NudftPlan(Trajectory const &traj, Dims dims)
    : dims_(dims), row_phase_(traj.size(), dims.rows), col_phase_(traj.size(), dims.cols) {
  if (dims.rows < 1 || dims.cols < 1)
    throw std::invalid_argument("NudftPlan: image dimensions must be positive");
  double const scale = 1.0 / std::sqrt(static_cast<double>(dims.size()));
  for (Index m = 0; m < traj.size(); ++m) {
    auto const &p = traj[m];
    for (Index r = 0; r < dims.rows; ++r)
      row_phase_(m, r) = scale * std::polar(1.0, -p.ky * static_cast<double>(r));
    for (Index c = 0; c < dims.cols; ++c)
      col_phase_(m, c) = std::polar(1.0, -p.kx * static_cast<double>(c));
  }
}

CVec NudftPlan::forward(ComplexImage const &img) const {
  if (img.dims() != dims_)
    throw std::invalid_argument("NudftPlan::forward: image dimensions do not match the plan");
  Eigen::MatrixXcd const partial = row_phase_ * img.matrix();
  return (partial.array() * col_phase_.array()).rowwise().sum();
}

ComplexImage NudftPlan::adjoint(CVec const &samples) const {
  if (samples.size() != this->samples())
    throw std::invalid_argument("NudftPlan::adjoint: sample count does not match the trajectory");
  ComplexImage out(dims_);
  out.matrix().noalias() = row_phase_.adjoint() * (samples.asDiagonal() * col_phase_.conjugate());
  return out;
}

CVec nudft_forward(ComplexImage const &img, Trajectory const &traj) {
  return NudftPlan(traj, img.dims()).forward(img);
}

ComplexImage nudft_adjoint(CVec const &samples, Trajectory const &traj, Dims dims) {
  if (samples.size() != traj.size())
    throw std::invalid_argument("nudft_adjoint: sample count does not match the trajectory");
  return NudftPlan(traj, dims).adjoint(samples);
}

SensitivityMaps::SensitivityMaps(std::vector<ComplexImage> maps) : maps_(std::move(maps)) {
  if (maps_.empty())
    throw std::invalid_argument("SensitivityMaps: at least one coil is required");
  Dims const d = maps_.front().dims();
  RVec energy = RVec::Zero(d.size());
  for (auto const &m : maps_) {
    if (m.dims() != d)
      throw std::invalid_argument("SensitivityMaps: all coils must share the image dimensions");
    energy += m.data().cwiseAbs2();
  }
  if (energy.size() > 0 && energy.maxCoeff() > 1.0 + 1e-12)
    throw std::invalid_argument("SensitivityMaps: sum of |S_l|^2 exceeds one");
}

SensitivityMaps SensitivityMaps::unit(Dims dims) {
  ComplexImage one(dims);
  one.data().setOnes();
  return SensitivityMaps({std::move(one)});
}

ForwardModel::ForwardModel(Trajectory traj, SensitivityMaps maps)
    : traj_(std::move(traj)), maps_(std::move(maps)) {
  if (traj_.size() < 1 || maps_.coils() < 1)
    throw std::invalid_argument("ForwardModel: empty trajectory or sensitivity set");
  plan_ = std::make_shared<NudftPlan const>(traj_, maps_.dims());
}

KSpaceData ForwardModel::forward(ComplexImage const &img) const {
  if (img.dims() != dims())
    throw std::invalid_argument("ForwardModel::forward: image dimensions do not match the model");
  Index const m = samples_per_coil();
  KSpaceData out{CVec(data_size())};
  ComplexImage weighted(dims());
  for (Index l = 0; l < coils(); ++l) {
    weighted.data() = maps_[l].data().cwiseProduct(img.data());
    out.samples.segment(l * m, m) = plan_->forward(weighted);
  }
  return out;
}

ComplexImage ForwardModel::adjoint(KSpaceData const &data) const {
  if (data.size() != data_size())
    throw std::invalid_argument("ForwardModel::adjoint: data length must equal M * L");
  Index const m = samples_per_coil();
  ComplexImage out(dims());
  for (Index l = 0; l < coils(); ++l) {
    ComplexImage const back = plan_->adjoint(data.samples.segment(l * m, m));
    out.data() += maps_[l].data().conjugate().cwiseProduct(back.data());
  }
  return out;
}

ComplexImage ForwardModel::normal(ComplexImage const &img) const {
  return adjoint(forward(img));
}

FidelityGrad fidelity_grad(ForwardModel const &model, ComplexImage const &img,
                           KSpaceData const &data) {
  if (data.size() != model.data_size())
    throw std::invalid_argument("fidelity_grad: data length must equal M * L");
  FidelityGrad out;
  out.residual = model.forward(img).samples - data.samples;
  out.value = 0.5 * out.residual.squaredNorm();
  out.grad = model.adjoint(KSpaceData{out.residual});
  return out;
}

} // namespace cqnp
