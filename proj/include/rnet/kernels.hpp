#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference in
// rnet::kernels::serial and an OpenMP version in rnet::kernels::omp with the
// same signature. Tests compare the two; the library calls the omp versions.
//
// Reductions in the omp namespace are chunked with a chunk size that does not
// depend on the thread count, and partial sums are combined in chunk order, so
// results are bit-identical for any number of threads.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#ifdef RNET_HAVE_OPENMP
#include <omp.h>
#endif

namespace rnet::kernels {

using Complex = std::complex<double>;

inline constexpr std::size_t kReduceChunk = 4096;

// Number of nonzero base-`base` digits of `index` over `length` digits.
inline int count_nonzero_digits(std::uint64_t index, int base, int length) {
  int count = 0;
  for (int d = 0; d < length; ++d) {
    count += (index % static_cast<std::uint64_t>(base)) != 0;
    index /= static_cast<std::uint64_t>(base);
  }
  return count;
}

namespace serial {

// c(m x n) = a(m x k) * b(k x n), all row-major.
void gemm(std::span<const Complex> a, std::span<const Complex> b, std::span<Complex> c,
          std::size_t m, std::size_t k, std::size_t n);

template <class Fn>
double sum_indexed(std::uint64_t count, Fn&& fn) {
  double total = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) total += fn(i);
  return total;
}

template <class Fn>
void for_each_index(std::uint64_t count, Fn&& fn) {
  for (std::uint64_t i = 0; i < count; ++i) fn(i);
}

}  // namespace serial

namespace omp {

void gemm(std::span<const Complex> a, std::span<const Complex> b, std::span<Complex> c,
          std::size_t m, std::size_t k, std::size_t n);

template <class Fn>
double sum_indexed(std::uint64_t count, Fn&& fn) {
  const std::uint64_t chunks = (count + kReduceChunk - 1) / kReduceChunk;
  std::vector<double> partial(chunks, 0.0);
#ifdef RNET_HAVE_OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t c = 0; c < static_cast<std::int64_t>(chunks); ++c) {
    const std::uint64_t begin = static_cast<std::uint64_t>(c) * kReduceChunk;
    const std::uint64_t end = std::min<std::uint64_t>(begin + kReduceChunk, count);
    double s = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) s += fn(i);
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double s : partial) total += s;
  return total;
}

template <class Fn>
void for_each_index(std::uint64_t count, Fn&& fn) {
#ifdef RNET_HAVE_OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i)
    fn(static_cast<std::uint64_t>(i));
}

}  // namespace omp

int max_threads();

}  // namespace rnet::kernels
