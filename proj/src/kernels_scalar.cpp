#include "titan/kernels/kernels.hpp"

#include <cmath>

namespace titan::kernels::detail {

namespace {

double dot_scalar(const double* a, const double* b, int n) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  const int n4 = n & ~3;
  for (int i = 0; i < n4; i += 4) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
  }
  double s = (s0 + s2) + (s1 + s3);
  for (int i = n4; i < n; ++i) s += a[i] * b[i];
  return s;
}

void affine_scalar(const double* w, const double* b, const double* x, double* y,
                   int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double acc = dot_scalar(w + static_cast<std::int64_t>(r) * cols, x, cols);
    y[r] = (b != nullptr) ? acc + b[r] : acc;
  }
}

void matvec_t_acc_scalar(const double* w, const double* dy, double* dx,
                         int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double g = dy[r];
    const double* row = w + static_cast<std::int64_t>(r) * cols;
    for (int c = 0; c < cols; ++c) dx[c] += g * row[c];
  }
}

void ger_acc_scalar(double* dw, const double* dy, const double* x,
                    int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double g = dy[r];
    double* row = dw + static_cast<std::int64_t>(r) * cols;
    for (int c = 0; c < cols; ++c) row[c] += g * x[c];
  }
}

void axpy_scalar(double a, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

void rmsprop_update_scalar(double* w, const double* g, double* ms, int n,
                           double lr, double alpha, double eps) {
  const double one_minus_alpha = 1.0 - alpha;
  for (int i = 0; i < n; ++i) {
    const double gi = g[i];
    ms[i] = alpha * ms[i] + one_minus_alpha * (gi * gi);
    w[i] -= (lr * gi) / (std::sqrt(ms[i]) + eps);
  }
}

}  // namespace

const Impl& scalar_impl() {
  static const Impl impl{affine_scalar, dot_scalar, matvec_t_acc_scalar,
                         ger_acc_scalar, axpy_scalar, rmsprop_update_scalar};
  return impl;
}

}  // namespace titan::kernels::detail
