#include <cmath>

#include "kernels_internal.hpp"

namespace gs1mc::kernels::detail {
namespace {

// softplus(x) = log(1 + exp(x)), never forming exp of a positive argument.
inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

inline double sigmoid1(double z) {
  const double e = std::exp(-std::abs(z));
  return z >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
}

double masked_logistic(const double* m, const double* pos, const double* neg, double* grad,
                       std::size_t n) {
  double loss = 0.0;
  for (std::size_t e = 0; e < n; ++e) {
    if (pos[e] != 0.0) loss += pos[e] * softplus(-m[e]);
    if (neg[e] != 0.0) loss += neg[e] * softplus(m[e]);
    if (grad) {
      const double f = sigmoid1(m[e]);
      grad[e] = pos[e] * (f - 1.0) + neg[e] * f;
    }
  }
  return loss;
}

void sigmoid(const double* z, double* out, std::size_t n) {
  for (std::size_t e = 0; e < n; ++e) out[e] = sigmoid1(z[e]);
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t e = 0; e < n; ++e) s += x[e] * y[e];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t e = 0; e < n; ++e) y[e] += a * x[e];
}

}  // namespace

const KernelTable& scalar_impl() noexcept {
  static const KernelTable table{"scalar", masked_logistic, sigmoid, dot, axpy};
  return table;
}

}  // namespace gs1mc::kernels::detail
