#pragma once

// Dense double-precision inner loops used by floating-mode elimination and
// simplex pivoting. Each kernel has a portable scalar reference and, on x86-64,
// an AVX2+FMA variant. The variant is picked once at first use from CPUID;
// ABSORBD_SIMD=scalar forces the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace absorbd::simd {

enum class Isa { scalar, avx2 };

namespace scalar {
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void scale(double alpha, std::span<double> x);
}  // namespace scalar

namespace avx2 {
bool supported();
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void scale(double alpha, std::span<double> x);
}  // namespace avx2

/// ISA selected for the dispatched entry points below.
Isa active_isa();
std::string_view isa_name(Isa isa);

/// Overrides the runtime choice (tests use this to pin a path). Requests for an
/// unsupported ISA fall back to scalar; returns the ISA actually installed.
Isa force_isa(Isa isa);

/// y += alpha * x. Requires x.size() == y.size().
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> x, std::span<const double> y);
void scale(double alpha, std::span<double> x);

}  // namespace absorbd::simd
