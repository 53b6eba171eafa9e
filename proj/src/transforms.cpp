#include "cqnp/transforms.hpp"

#include <cmath>
#include <numbers>

namespace cqnp {

namespace {

constexpr double kInvSqrt2 = 1.0 / std::numbers::sqrt2;

// One orthonormal Haar butterfly along the rows of the leading h x w block.
void haar_rows(CMat &m, Index h, Index w, Eigen::VectorXcd &tmp) {
  Index const half = w / 2;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < half; ++c) {
      Cx const a = m(r, 2 * c);
      Cx const b = m(r, 2 * c + 1);
      tmp[c] = (a + b) * kInvSqrt2;
      tmp[half + c] = (a - b) * kInvSqrt2;
    }
    m.row(r).head(w) = tmp.head(w).transpose();
  }
}

void haar_cols(CMat &m, Index h, Index w, Eigen::VectorXcd &tmp) {
  Index const half = h / 2;
  for (Index c = 0; c < w; ++c) {
    for (Index r = 0; r < half; ++r) {
      Cx const a = m(2 * r, c);
      Cx const b = m(2 * r + 1, c);
      tmp[r] = (a + b) * kInvSqrt2;
      tmp[half + r] = (a - b) * kInvSqrt2;
    }
    m.col(c).head(h) = tmp.head(h);
  }
}

void inverse_haar_rows(CMat &m, Index h, Index w, Eigen::VectorXcd &tmp) {
  Index const half = w / 2;
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < half; ++c) {
      Cx const s = m(r, c);
      Cx const d = m(r, half + c);
      tmp[2 * c] = (s + d) * kInvSqrt2;
      tmp[2 * c + 1] = (s - d) * kInvSqrt2;
    }
    m.row(r).head(w) = tmp.head(w).transpose();
  }
}

void inverse_haar_cols(CMat &m, Index h, Index w, Eigen::VectorXcd &tmp) {
  Index const half = h / 2;
  for (Index c = 0; c < w; ++c) {
    for (Index r = 0; r < half; ++r) {
      Cx const s = m(r, c);
      Cx const d = m(half + r, c);
      tmp[2 * r] = (s + d) * kInvSqrt2;
      tmp[2 * r + 1] = (s - d) * kInvSqrt2;
    }
    m.col(c).head(h) = tmp.head(h);
  }
}

void check_pair_shapes(DualPair const &pair) {
  bool const ok = pair.Q.rows() == pair.P.rows() + 1 && pair.P.cols() == pair.Q.cols() + 1;
  if (!ok)
    throw std::invalid_argument("DualPair: P must be (I-1) x J and Q must be I x (J-1)");
}

Cx disk(Cx v) {
  double const a = std::abs(v);
  return a > 1.0 ? v / a : v;
}

} // namespace

void validate(WaveletSpec const &spec, Dims dims) {
  if (spec.levels < 1)
    throw std::invalid_argument("WaveletSpec: levels must be positive");
  if (spec.levels >= 62)
    throw std::invalid_argument("WaveletSpec: too many levels");
  Index const block = Index{1} << spec.levels;
  if (dims.rows < block || dims.cols < block || dims.rows % block != 0 || dims.cols % block != 0)
    throw std::invalid_argument("WaveletSpec: image dims must be divisible by 2^levels");
}

CVec wavelet_forward(ComplexImage const &img, WaveletSpec const &spec) {
  validate(spec, img.dims());
  CMat m = img.matrix();
  Eigen::VectorXcd tmp(std::max(img.rows(), img.cols()));
  Index h = img.rows();
  Index w = img.cols();
  for (int level = 0; level < spec.levels; ++level) {
    haar_rows(m, h, w, tmp);
    haar_cols(m, h, w, tmp);
    h /= 2;
    w /= 2;
  }
  return Eigen::Map<CVec const>(m.data(), m.size());
}

ComplexImage wavelet_adjoint(CVec const &coeffs, WaveletSpec const &spec, Dims dims) {
  validate(spec, dims);
  if (coeffs.size() != dims.size())
    throw std::invalid_argument("wavelet_adjoint: coefficient length must equal rows * cols");
  ComplexImage out(dims, coeffs);
  CMat m = out.matrix();
  Eigen::VectorXcd tmp(std::max(dims.rows, dims.cols));
  for (int level = spec.levels - 1; level >= 0; --level) {
    Index const h = dims.rows >> level;
    Index const w = dims.cols >> level;
    inverse_haar_cols(m, h, w, tmp);
    inverse_haar_rows(m, h, w, tmp);
  }
  out.matrix() = m;
  return out;
}

double tv_value(ComplexImage const &img, TvVariant variant) {
  Index const I = img.rows();
  Index const J = img.cols();
  double total = 0.0;
  for (Index i = 0; i + 1 < I; ++i) {
    for (Index j = 0; j + 1 < J; ++j) {
      double const dv = std::abs(img(i, j) - img(i + 1, j));
      double const dh = std::abs(img(i, j) - img(i, j + 1));
      total += variant == TvVariant::iso ? std::hypot(dv, dh) : dv + dh;
    }
  }
  for (Index i = 0; i + 1 < I; ++i)
    total += std::abs(img(i, J - 1) - img(i + 1, J - 1));
  for (Index j = 0; j + 1 < J; ++j)
    total += std::abs(img(I - 1, j) - img(I - 1, j + 1));
  return total;
}

DualPair DualPair::zeros(Dims dims) {
  return {CMat::Zero(dims.rows - 1, dims.cols), CMat::Zero(dims.rows, dims.cols - 1)};
}

ComplexImage L_apply(DualPair const &pair) {
  check_pair_shapes(pair);
  Dims const d = pair.image_dims();
  ComplexImage out(d);
  auto X = out.matrix();
  Index const I = d.rows;
  Index const J = d.cols;
  if (I > 1) {
    X.topRows(I - 1) += pair.P;
    X.bottomRows(I - 1) -= pair.P;
  }
  if (J > 1) {
    X.leftCols(J - 1) += pair.Q;
    X.rightCols(J - 1) -= pair.Q;
  }
  return out;
}

DualPair L_adjoint(ComplexImage const &img) {
  auto const X = img.matrix();
  Index const I = img.rows();
  Index const J = img.cols();
  DualPair out = DualPair::zeros(img.dims());
  if (I > 1)
    out.P = X.topRows(I - 1) - X.bottomRows(I - 1);
  if (J > 1)
    out.Q = X.leftCols(J - 1) - X.rightCols(J - 1);
  return out;
}

CVec proj_Z(CVec const &z) { return z.unaryExpr(&disk); }

DualPair proj_P(DualPair const &pair, TvVariant variant) {
  check_pair_shapes(pair);
  if (variant == TvVariant::l1)
    return {pair.P.unaryExpr(&disk), pair.Q.unaryExpr(&disk)};

  DualPair out = pair;
  Index const I = pair.Q.rows();
  Index const J = pair.P.cols();
  for (Index i = 0; i + 1 < I; ++i) {
    for (Index j = 0; j + 1 < J; ++j) {
      double const mag = std::sqrt(std::norm(pair.P(i, j)) + std::norm(pair.Q(i, j)));
      if (mag > 1.0) {
        out.P(i, j) /= mag;
        out.Q(i, j) /= mag;
      }
    }
  }
  // Boundary entries have no partner and are projected alone.
  for (Index i = 0; i + 1 < I; ++i)
    out.P(i, J - 1) = disk(pair.P(i, J - 1));
  for (Index j = 0; j + 1 < J; ++j)
    out.Q(I - 1, j) = disk(pair.Q(I - 1, j));
  return out;
}

SmoothedL1 smoothed_l1(CVec const &coeffs, double eta) {
  if (!(eta > 0.0))
    throw std::invalid_argument("smoothed_l1: eta must be positive");
  RVec const root = (coeffs.cwiseAbs2().array() + eta).sqrt();
  SmoothedL1 out;
  out.value = root.sum();
  out.grad = coeffs.array() / root.array().cast<Cx>();
  return out;
}

} // namespace cqnp
