#include "absorbd/simd/kernels.hpp"

namespace absorbd::simd::scalar {

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

void scale(double alpha, std::span<double> x) {
  for (auto& v : x) v *= alpha;
}

}  // namespace absorbd::simd::scalar
