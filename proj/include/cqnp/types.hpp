#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace cqnp {

using Index = Eigen::Index;
using Cx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::Matrix<Cx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RVec = Eigen::VectorXd;

/// Thrown when a weighting matrix that must be positive definite is not.
class NotPositiveDefinite : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an inner iteration exhausts its budget without meeting its tolerance.
class ConvergenceFailure : public std::runtime_error {
public:
  ConvergenceFailure(std::string const &what, double best_residual)
      : std::runtime_error(what), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

private:
  double best_residual_;
};

/// Thrown when a line search exhausts its step reductions.
class StepFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Dims {
  Index rows = 0;
  Index cols = 0;
  Index size() const { return rows * cols; }
  bool operator==(Dims const &) const = default;
};

/// I x J grid of complex samples stored row-major: pixel (r, c) lives at r * cols + c.
class ComplexImage {
public:
  ComplexImage() = default;
  ComplexImage(Index rows, Index cols) : ComplexImage(Dims{rows, cols}) {}
  explicit ComplexImage(Dims dims) : dims_(check(dims)), data_(CVec::Zero(dims.size())) {}
  ComplexImage(Dims dims, CVec data) : dims_(check(dims)), data_(std::move(data)) {
    if (data_.size() != dims_.size())
      throw std::invalid_argument("ComplexImage: data length does not match rows * cols");
  }

  Dims dims() const { return dims_; }
  Index rows() const { return dims_.rows; }
  Index cols() const { return dims_.cols; }
  Index size() const { return dims_.size(); }

  Cx &operator()(Index r, Index c) { return data_[r * dims_.cols + c]; }
  Cx operator()(Index r, Index c) const { return data_[r * dims_.cols + c]; }

  CVec &data() { return data_; }
  CVec const &data() const { return data_; }

  Eigen::Map<CMat> matrix() { return {data_.data(), dims_.rows, dims_.cols}; }
  Eigen::Map<CMat const> matrix() const { return {data_.data(), dims_.rows, dims_.cols}; }

private:
  static Dims check(Dims d) {
    if (d.rows < 1 || d.cols < 1)
      throw std::invalid_argument("ComplexImage: rows and cols must be positive");
    return d;
  }

  Dims dims_{};
  CVec data_;
};

/// <a, b> = b^H a
inline Cx inner(CVec const &a, CVec const &b) { return b.dot(a); }

} // namespace cqnp
