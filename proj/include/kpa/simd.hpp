#pragma once

// Dense double-precision kernels used by the embedding, matcher and
// clustering code. Every kernel has a scalar reference implementation and,
// on x86-64 builds, an AVX2+FMA variant. The variant is chosen once at
// startup from CPUID and can be overridden with KPA_SIMD_LEVEL=scalar|avx2.

#include <cstddef>
#include <span>
#include <string_view>

namespace kpa::simd {

enum class Level { Scalar, Avx2 };

struct Kernels {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y = W x, W row-major rows x cols
  void (*gemv)(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
}  // namespace scalar

#if defined(KPA_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
void gemv(const double* w, std::size_t rows, std::size_t cols, const double* x, double* y);
}  // namespace avx2
#endif

/// True when the variant was compiled in and the CPU can run it.
bool supported(Level level);

/// Kernel table for a specific level; throws std::invalid_argument if unsupported.
const Kernels& kernels(Level level);

/// Level used by the span wrappers below.
Level active_level();
void set_active_level(Level level);

std::string_view name(Level level);
Level parse_level(std::string_view text);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);
void gemv(std::span<const double> w, std::size_t rows, std::size_t cols,
          std::span<const double> x, std::span<double> y);

}  // namespace kpa::simd
