#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kpa/simd.hpp"

namespace kpa::simd {

namespace {

constexpr Kernels kScalar{&scalar::dot, &scalar::axpy, &scalar::squared_distance, &scalar::gemv};
#if defined(KPA_HAVE_AVX2)
constexpr Kernels kAvx2{&avx2::dot, &avx2::axpy, &avx2::squared_distance, &avx2::gemv};
#endif

bool cpu_has_avx2() {
#if defined(KPA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Level initial_level() {
  if (const char* env = std::getenv("KPA_SIMD_LEVEL")) {
    const Level wanted = parse_level(env);
    if (!supported(wanted)) {
      throw std::runtime_error(std::string("KPA_SIMD_LEVEL=") + env + " is not supported on this CPU/build");
    }
    return wanted;
  }
  return supported(Level::Avx2) ? Level::Avx2 : Level::Scalar;
}

std::atomic<Level>& active() {
  static std::atomic<Level> level{initial_level()};
  return level;
}

const Kernels& table(Level level) {
#if defined(KPA_HAVE_AVX2)
  if (level == Level::Avx2) return kAvx2;
#endif
  (void)level;
  return kScalar;
}

const Kernels& current() { return table(active().load(std::memory_order_relaxed)); }

void check_same(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd: length mismatch");
}

}  // namespace

bool supported(Level level) {
  switch (level) {
    case Level::Scalar:
      return true;
    case Level::Avx2:
      return cpu_has_avx2();
  }
  return false;
}

const Kernels& kernels(Level level) {
  if (!supported(level)) throw std::invalid_argument("simd level not supported: " + std::string(name(level)));
  return table(level);
}

Level active_level() { return active().load(std::memory_order_relaxed); }

void set_active_level(Level level) {
  if (!supported(level)) throw std::invalid_argument("simd level not supported: " + std::string(name(level)));
  active().store(level, std::memory_order_relaxed);
}

std::string_view name(Level level) {
  switch (level) {
    case Level::Scalar:
      return "scalar";
    case Level::Avx2:
      return "avx2";
  }
  return "unknown";
}

Level parse_level(std::string_view text) {
  if (text == "scalar" || text == "SCALAR" || text == "none" || text == "NONE") return Level::Scalar;
  if (text == "avx2" || text == "AVX2") return Level::Avx2;
  throw std::invalid_argument("unknown simd level: " + std::string(text));
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size());
  return current().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size());
  current().axpy(alpha, x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size());
  return current().squared_distance(a.data(), b.data(), a.size());
}

void gemv(std::span<const double> w, std::size_t rows, std::size_t cols, std::span<const double> x,
          std::span<double> y) {
  check_same(w.size(), rows * cols);
  check_same(x.size(), cols);
  check_same(y.size(), rows);
  current().gemv(w.data(), rows, cols, x.data(), y.data());
}

}  // namespace kpa::simd
