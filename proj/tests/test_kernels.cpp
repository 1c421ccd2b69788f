#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "rnet/kernels.hpp"

namespace rnet::kernels {
namespace {

std::vector<Complex> random_entries(std::size_t count, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::vector<Complex> v(count);
  for (auto& z : v) z = Complex{g(rng), g(rng)};
  return v;
}

TEST(Kernels, GemmMatchesSerial) {
  std::mt19937_64 rng(1);
  for (auto [m, k, n] : {std::tuple{3u, 4u, 5u}, std::tuple{1u, 7u, 1u}, std::tuple{40u, 60u, 50u}}) {
    auto a = random_entries(m * k, rng);
    auto b = random_entries(k * n, rng);
    std::vector<Complex> c1(m * n), c2(m * n);
    serial::gemm(a, b, c1, m, k, n);
    omp::gemm(a, b, c2, m, k, n);
    for (std::size_t i = 0; i < c1.size(); ++i) EXPECT_NEAR(std::abs(c1[i] - c2[i]), 0.0, 1e-12);
  }
}

TEST(Kernels, GemmSmallCase) {
  std::vector<Complex> a{1, 2, 3, 4};
  std::vector<Complex> b{5, 6, 7, 8};
  std::vector<Complex> c(4);
  omp::gemm(a, b, c, 2, 2, 2);
  EXPECT_EQ(c[0], Complex(19));
  EXPECT_EQ(c[1], Complex(22));
  EXPECT_EQ(c[2], Complex(43));
  EXPECT_EQ(c[3], Complex(50));
}

TEST(Kernels, SumIndexedAgreesAndIsRepeatable) {
  auto fn = [](std::uint64_t i) { return 1.0 / static_cast<double>(i + 1); };
  const std::uint64_t count = 100'003;
  const double s = serial::sum_indexed(count, fn);
  const double p1 = omp::sum_indexed(count, fn);
  const double p2 = omp::sum_indexed(count, fn);
  EXPECT_NEAR(s, p1, 1e-10);
  EXPECT_EQ(p1, p2);
  EXPECT_EQ(omp::sum_indexed(0, fn), 0.0);
}

TEST(Kernels, ForEachIndexVisitsEveryIndexOnce) {
  std::vector<int> hits(5000, 0);
  omp::for_each_index(hits.size(), [&](std::uint64_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Kernels, CountNonzeroDigits) {
  EXPECT_EQ(count_nonzero_digits(0, 3, 4), 0);
  EXPECT_EQ(count_nonzero_digits(1 + 2 * 9, 3, 4), 2);  // digits 1,0,2,0
  EXPECT_EQ(count_nonzero_digits(80, 3, 4), 4);         // 2222 in base 3
}

}  // namespace
}  // namespace rnet::kernels
