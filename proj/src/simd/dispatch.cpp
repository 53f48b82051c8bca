#include "absorbd/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace absorbd::simd {

namespace {

Isa detect() {
  if (const char* env = std::getenv("ABSORBD_SIMD"); env && std::string(env) == "scalar") return Isa::scalar;
  return avx2::supported() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

Isa force_isa(Isa isa) {
  if (isa == Isa::avx2 && !avx2::supported()) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
  return isa;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (active_isa() == Isa::avx2)
    avx2::axpy(alpha, x, y);
  else
    scalar::axpy(alpha, x, y);
}

double dot(std::span<const double> x, std::span<const double> y) {
  return active_isa() == Isa::avx2 ? avx2::dot(x, y) : scalar::dot(x, y);
}

void scale(double alpha, std::span<double> x) {
  if (active_isa() == Isa::avx2)
    avx2::scale(alpha, x);
  else
    scalar::scale(alpha, x);
}

}  // namespace absorbd::simd
