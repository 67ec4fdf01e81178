#pragma once
// Data-parallel inner loops used by the linear algebra layer.
//
// Each kernel has a scalar reference implementation and, where the target
// supports it, an AVX2/FMA (x86-64) or NEON (aarch64) variant. The active
// table is chosen once at startup from CPU feature detection and can be
// pinned to the scalar path (WDRO_SIMD=scalar, or force_backend()) for
// bit-reproducible golden files across machines.

#include <cstddef>
#include <span>
#include <string_view>

namespace wdro::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*abs_sum)(const double* x, std::size_t n);
  double (*sum_sq)(const double* x, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  // y = A x, A row-major rows x cols
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);
};

const KernelTable& scalar_table();
// Returns nullptr when the variant is not compiled in or not supported by the CPU.
const KernelTable* avx2_table();
const KernelTable* neon_table();

Backend active_backend();
std::string_view backend_name(Backend b);
// Pins the dispatch; returns false if the backend is unavailable on this machine.
bool force_backend(Backend b);

const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}
inline double abs_sum(std::span<const double> x) { return active().abs_sum(x.data(), x.size()); }
inline double sum_sq(std::span<const double> x) { return active().sum_sq(x.data(), x.size()); }
inline double max_abs(std::span<const double> x) { return active().max_abs(x.data(), x.size()); }

}  // namespace wdro::kernels
