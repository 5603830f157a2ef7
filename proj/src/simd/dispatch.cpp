#include "qkad/simd/simd.hpp"

#include <atomic>

namespace qkad::simd {

namespace {

Level probe() {
#if defined(QKAD_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    return Level::avx2;
#endif
  return Level::scalar;
}

std::atomic<Level> g_level{probe()};

}  // namespace

const char* level_name(Level level) {
  switch (level) {
    case Level::avx2:
      return "avx2";
    case Level::scalar:
    default:
      return "scalar";
  }
}

Level detect() {
  static const Level best = probe();
  return best;
}

Level active_level() { return g_level.load(std::memory_order_relaxed); }

Level set_level(Level level) {
  if (level > detect()) level = detect();
  g_level.store(level, std::memory_order_relaxed);
  return level;
}

double l2sq(const double* a, const double* b, std::size_t n) {
#if defined(QKAD_HAVE_AVX2)
  if (active_level() == Level::avx2) return detail::l2sq_avx2(a, b, n);
#endif
  return detail::l2sq_scalar(a, b, n);
}

double dot(const double* a, const double* b, std::size_t n) {
#if defined(QKAD_HAVE_AVX2)
  if (active_level() == Level::avx2) return detail::dot_avx2(a, b, n);
#endif
  return detail::dot_scalar(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#if defined(QKAD_HAVE_AVX2)
  if (active_level() == Level::avx2) return detail::axpy_avx2(alpha, x, y, n);
#endif
  detail::axpy_scalar(alpha, x, y, n);
}

void abs2(const std::complex<double>* a, double* out, std::size_t n) {
#if defined(QKAD_HAVE_AVX2)
  if (active_level() == Level::avx2) return detail::abs2_avx2(a, out, n);
#endif
  detail::abs2_scalar(a, out, n);
}

void apply_gate1(std::complex<double>* amps, std::size_t n, unsigned target,
                 const std::complex<double> m[4]) {
#if defined(QKAD_HAVE_AVX2)
  if (active_level() == Level::avx2)
    return detail::apply_gate1_avx2(amps, n, target, m);
#endif
  detail::apply_gate1_scalar(amps, n, target, m);
}

}  // namespace qkad::simd
