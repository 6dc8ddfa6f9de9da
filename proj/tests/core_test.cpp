#include <gtest/gtest.h>

#include <cstring>
#include <numeric>

#include "signbench/parallel.hpp"
#include "signbench/rng.hpp"
#include "signbench/tensor.hpp"
#include "test_util.hpp"

using namespace signbench;

TEST(Elementwise, AddAndScalarMul) {
  auto a = Tensor<double>::from_vector({1, 2});
  auto b = Tensor<double>::from_vector({3, 4});
  auto c = a + b;
  EXPECT_EQ(c[0], 4);
  EXPECT_EQ(c[1], 6);

  auto d = Tensor<double>::from_vector({1, 2, 3}) * 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) EXPECT_EQ(d[i], 0.0);
}

TEST(Elementwise, ShapeMismatchNamesBothShapes) {
  Tensor<double> a({2, 3});
  Tensor<double> b({3, 2});
  try {
    elementwise(EwOp::add, a, b);
    FAIL() << "expected shape mismatch";
  } catch (const Error& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("(2,3)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(3,2)"), std::string::npos) << msg;
  }
}

TEST(Matmul, IdentityAndDot) {
  auto eye = Tensor<double>::from_matrix({{1, 0}, {0, 1}});
  auto m = Tensor<double>::from_matrix({{1, 2}, {3, 4}});
  auto prod = matmul(eye, m);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(prod[i], m[i]);

  auto row = Tensor<double>::from_matrix({{1, 2}});
  auto col = Tensor<double>::from_matrix({{3}, {4}});
  auto dot = matmul(row, col);
  EXPECT_EQ(dot.shape(), (Shape{1, 1}));
  EXPECT_EQ(dot[0], 11);
}

TEST(Matmul, DimensionMismatch) {
  Tensor<double> a({2, 3});
  Tensor<double> b({2, 3});
  EXPECT_THROW(matmul(a, b), Error);
}

TEST(Matmul, AgreesWithNaiveOracle) {
  SeededRng rng(2024, 1);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t m = 1 + rng.uniform_index(8);
    std::size_t k = 1 + rng.uniform_index(8);
    std::size_t n = 1 + rng.uniform_index(8);
    auto a = testutil::random_tensor<double>({m, k}, rng);
    auto b = testutil::random_tensor<double>({k, n}, rng);
    auto fast = matmul(a, b);
    auto slow = testutil::naive_matmul(a, b);
    for (std::size_t i = 0; i < fast.size(); ++i)
      ASSERT_LE(testutil::rel_err(fast[i], slow[i]), 1e-12);
  }
}

TEST(Reduce, SumMeanMax) {
  auto v = Tensor<double>::from_vector({1, 2, 3});
  EXPECT_EQ(sum(v), 6);

  auto m = Tensor<double>::from_matrix({{1, 2}, {3, 4}});
  auto col_mean = reduce(ReduceOp::mean, m, 0);
  EXPECT_EQ(col_mean.shape(), (Shape{2}));
  EXPECT_EQ(col_mean[0], 2);
  EXPECT_EQ(col_mean[1], 3);

  auto row_max = reduce(ReduceOp::max, m, 1);
  EXPECT_EQ(row_max[0], 2);
  EXPECT_EQ(row_max[1], 4);
}

TEST(Reduce, ArgmaxLowestTiedIndex) {
  auto v = Tensor<double>::from_vector({5, 9, 9});
  EXPECT_EQ(argmax_index(v), 1u);

  // Property over random tensors with forced duplicates: no earlier element
  // may equal the max.
  SeededRng rng(7, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + rng.uniform_index(30);
    Tensor<double> t({n});
    for (std::size_t i = 0; i < n; ++i)
      t[i] = static_cast<double>(rng.uniform_index(5));
    std::size_t i = argmax_index(t);
    double mx = t[i];
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_LE(t[j], mx);
      if (j < i) ASSERT_NE(t[j], mx);
    }
  }
}

TEST(Reduce, AxisOutOfRange) {
  Tensor<double> t({2, 2});
  EXPECT_THROW(reduce(ReduceOp::sum, t, 2), Error);
}

TEST(Rng, SameSeedStreamSameSequence) {
  SeededRng a(42, 3), b(42, 3);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, DistinctStreamsDiffer) {
  SeededRng a(42, 0), b(42, 1);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i)
    if (a.next_u64() != b.next_u64()) all_equal = false;
  EXPECT_FALSE(all_equal);
}

TEST(Rng, SubstreamIndependentOfConsumption) {
  SeededRng a(9, 5);
  SeededRng child_before = a.substream(7);
  a.next_u64();
  a.next_u64();
  SeededRng child_after = a.substream(7);
  for (int i = 0; i < 10; ++i)
    EXPECT_EQ(child_before.next_u64(), child_after.next_u64());
}

TEST(Rng, UniformIndexInRangeAndShuffleDeterministic) {
  SeededRng rng(1, 2);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(rng.uniform_index(17), 17u);

  std::vector<int> v1(20), v2(20);
  std::iota(v1.begin(), v1.end(), 0);
  std::iota(v2.begin(), v2.end(), 0);
  SeededRng r1(5, 5), r2(5, 5);
  r1.shuffle(v1);
  r2.shuffle(v2);
  EXPECT_EQ(v1, v2);
}

TEST(Parallel, GemmBitIdenticalAcrossThreadCounts) {
  SeededRng rng(11, 0);
  auto a = testutil::random_tensor<float>({193, 77}, rng);
  auto b = testutil::random_tensor<float>({77, 41}, rng);

  auto& pool = ThreadPool::instance();
  pool.set_threads(1);
  auto c1 = matmul(a, b);
  pool.set_threads(4);
  auto c4 = matmul(a, b);
  pool.set_threads(0);  // back to default

  ASSERT_EQ(c1.size(), c4.size());
  EXPECT_EQ(std::memcmp(c1.data(), c4.data(), c1.size() * sizeof(float)), 0);
}

TEST(Parallel, ExceptionPropagates) {
  EXPECT_THROW(parallel_for(0, 100, 10,
                            [](std::size_t lo, std::size_t) {
                              if (lo >= 50) throw Error("boom");
                            }),
               Error);
}

TEST(Tensor, InvariantSizeMatchesShape) {
  Tensor<float> t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_THROW(Tensor<float>({2, 2}, std::vector<float>(5)), Error);
  EXPECT_THROW(Tensor<float>({0, 2}), Error);
}
