#include "isoembed/kernels.hpp"

#include <Eigen/Dense>

namespace isoembed {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void pinv_batch(const double* mats, std::size_t count, int r, int q, double* pinv, double* sigma, Exec e) {
  const std::size_t stride = static_cast<std::size_t>(r) * q;
  for_each_index(e, count, [&](std::size_t m) {
    Eigen::Map<const RowMat> A(mats + m * stride, r, q);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    sigma[m] = s.size() < r ? 0.0 : s(r - 1);
    Eigen::Map<RowMat> P(pinv + m * stride, q, r);
    Eigen::VectorXd inv = s;
    for (int i = 0; i < inv.size(); ++i) inv(i) = s(i) > 0 ? 1.0 / s(i) : 0.0;
    P = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
  });
}

void apply_batch(const double* pinv, const double* rhs, std::size_t count, int r, int q, double* out, Exec e) {
  const std::size_t stride = static_cast<std::size_t>(r) * q;
  for_each_index(e, count, [&](std::size_t m) {
    const double* P = pinv + m * stride;
    const double* b = rhs + m * r;
    double* o = out + m * q;
    for (int k = 0; k < q; ++k) {
      double acc = 0;
      for (int i = 0; i < r; ++i) acc += P[k * r + i] * b[i];
      o[k] = acc;
    }
  });
}

void scaled_sigma_batch(const double* mats, std::size_t count, int r, int q, const double* rowscale,
                        double* sigma, Exec e) {
  const std::size_t stride = static_cast<std::size_t>(r) * q;
  for_each_index(e, count, [&](std::size_t m) {
    RowMat A = Eigen::Map<const RowMat>(mats + m * stride, r, q);
    for (int i = 0; i < r; ++i) {
      if (rowscale[i] > 0)
        A.row(i) /= rowscale[i];
      else
        A.row(i).setZero();
    }
    if (r > q) {
      sigma[m] = 0.0;
      return;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    sigma[m] = svd.singularValues()(r - 1);
  });
}

void gram_batch(const double* mats, std::size_t count, int r, int q, double* out, Exec e) {
  const std::size_t stride = static_cast<std::size_t>(r) * q;
  const int s = r * (r + 1) / 2;
  for_each_index(e, count, [&](std::size_t m) {
    const double* A = mats + m * stride;
    int idx = 0;
    for (int i = 0; i < r; ++i)
      for (int j = i; j < r; ++j) {
        double acc = 0;
        for (int k = 0; k < q; ++k) acc += A[i * q + k] * A[j * q + k];
        out[m * s + idx++] = acc;
      }
  });
}

}  // namespace isoembed
