#include "rnet/kernels.hpp"

#include <algorithm>

namespace rnet::kernels {

namespace serial {

void gemm(std::span<const Complex> a, std::span<const Complex> b, std::span<Complex> c,
          std::size_t m, std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc{0.0, 0.0};
      for (std::size_t l = 0; l < k; ++l) acc += a[i * k + l] * b[l * n + j];
      c[i * n + j] = acc;
    }
  }
}

}  // namespace serial

namespace omp {

void gemm(std::span<const Complex> a, std::span<const Complex> b, std::span<Complex> c,
          std::size_t m, std::size_t k, std::size_t n) {
  // i-l-j order keeps the inner loop unit-stride over b and c.
#ifdef RNET_HAVE_OPENMP
#pragma omp parallel for schedule(static) if (m * k * n > 32768)
#endif
  for (std::int64_t is = 0; is < static_cast<std::int64_t>(m); ++is) {
    const auto i = static_cast<std::size_t>(is);
    // Interleaved re/im views; std::complex<double> is layout-compatible with double[2].
    double* __restrict row = reinterpret_cast<double*>(c.data() + i * n);
    std::fill(row, row + 2 * n, 0.0);
    for (std::size_t l = 0; l < k; ++l) {
      const double ar = a[i * k + l].real(), ai = a[i * k + l].imag();
      if (ar == 0.0 && ai == 0.0) continue;
      const double* __restrict brow = reinterpret_cast<const double*>(b.data() + l * n);
      for (std::size_t j = 0; j < n; ++j) {
        const double br = brow[2 * j], bi = brow[2 * j + 1];
        row[2 * j] += ar * br - ai * bi;
        row[2 * j + 1] += ar * bi + ai * br;
      }
    }
  }
}

}  // namespace omp

int max_threads() {
#ifdef RNET_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace rnet::kernels
