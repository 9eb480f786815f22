#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "edgecl/errors.hpp"
#include "edgecl/gemm.hpp"
#include "edgecl/im2col.hpp"
#include "oracles.hpp"

namespace edgecl {
namespace {

using testing::naive_flip;
using testing::naive_gemm;
using testing::naive_im2col;
using testing::random_tensor;

Tensor iota(Shape dims, float start = 1.0f) {
  Tensor t(std::move(dims));
  std::iota(t.values().begin(), t.values().end(), start);
  return t;
}

TEST(Tensor, RejectsZeroExtentsAndSizeMismatch) {
  EXPECT_THROW(Tensor({2, 0, 3}), ShapeError);
  EXPECT_THROW(Tensor(Shape{}), ShapeError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<float>(3)), ShapeError);
  EXPECT_EQ(Tensor({2, 3, 4}).size(), 24u);
}

TEST(Tensor, ReshapeKeepsDataAndChecksCount) {
  const Tensor t = iota({2, 6});
  const Tensor r = t.reshaped({3, 2, 2});
  EXPECT_EQ(r.dims(), (Shape{3, 2, 2}));
  EXPECT_TRUE(bitwise_equal(t.values(), r.values()));
  EXPECT_THROW((void)t.reshaped({5}), ShapeError);
}

TEST(Tensor, OuterSliceAddressesOneSample) {
  const Tensor t = iota({3, 2, 2});
  const auto s = t.outer_slice(1);
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], 5.0f);
  EXPECT_EQ(s[3], 8.0f);
}

TEST(BitwiseEqual, DistinguishesSignedZero) {
  EXPECT_FALSE(bitwise_equal(Tensor({1}, {0.0f}), Tensor({1}, {-0.0f})));
  EXPECT_TRUE(bitwise_equal(Tensor({1}, {1.5f}), Tensor({1}, {1.5f})));
}

TEST(Gemm, IdentityLeavesOperandUnchanged) {
  std::mt19937_64 rng(1);
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0f;
  const Tensor b = random_tensor({3, 4}, rng);
  EXPECT_TRUE(bitwise_equal(gemm(eye, b), b));
}

TEST(Gemm, ZeroOperandGivesZeros) {
  std::mt19937_64 rng(2);
  const Tensor out = gemm(Tensor({2, 5}), random_tensor({5, 2}, rng));
  EXPECT_EQ(out, Tensor({2, 2}));
}

TEST(Gemm, MatchesTripleLoopExactly) {
  std::mt19937_64 rng(3);
  const Tensor a = random_tensor({7, 5}, rng);
  const Tensor b = random_tensor({5, 3}, rng);
  EXPECT_TRUE(bitwise_equal(gemm(a, b), naive_gemm(a, b)));
}

TEST(Gemm, ShapeMismatchThrows) {
  EXPECT_THROW((void)gemm(Tensor({2, 3}), Tensor({4, 2})), ShapeError);
  EXPECT_THROW((void)gemm(Tensor({2, 3}), Tensor({3, 2}), Tensor({3, 2})), ShapeError);
}

TEST(Gemm, AccumulateContinuesFromPriorValue) {
  std::mt19937_64 rng(4);
  const Tensor a = random_tensor({4, 6}, rng);
  const Tensor b = random_tensor({6, 5}, rng);
  const Tensor c = random_tensor({4, 5}, rng);
  const Tensor out = gemm(a, b, c);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 5; ++j) {
      float s = c[i * 5 + j];
      for (std::size_t k = 0; k < 6; ++k) s += a[i * 6 + k] * b[k * 5 + j];
      EXPECT_EQ(out[i * 5 + j], s);
    }
  }
}

TEST(Gemm, SplittingKInOrderIsBitIdentical) {
  std::mt19937_64 rng(5);
  const Tensor a = random_tensor({5, 9}, rng);
  const Tensor b = random_tensor({9, 4}, rng);
  Tensor a1({5, 4}), a2({5, 5});
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < 9; ++k) (k < 4 ? a1[i * 4 + k] : a2[i * 5 + k - 4]) = a[i * 9 + k];
  Tensor b1({4, 4}), b2({5, 4});
  for (std::size_t k = 0; k < 9; ++k)
    for (std::size_t j = 0; j < 4; ++j) (k < 4 ? b1[k * 4 + j] : b2[(k - 4) * 4 + j]) = b[k * 4 + j];
  EXPECT_TRUE(bitwise_equal(gemm(a2, b2, gemm(a1, b1)), gemm(a, b)));
}

TEST(Gemm, WorkerCountDoesNotChangeBits) {
  std::mt19937_64 rng(6);
  const Tensor a = random_tensor({37, 23}, rng);
  const Tensor b = random_tensor({23, 19}, rng);
  const Tensor one = gemm(a, b, 1);
  for (std::size_t w : {2u, 3u, 8u, 64u}) EXPECT_TRUE(bitwise_equal(gemm(a, b, w), one)) << w << " workers";
}

TEST(Gemm, TransposedViewUsesSameReduction) {
  std::mt19937_64 rng(7);
  const Tensor a = random_tensor({6, 4}, rng);
  const Tensor bt = random_tensor({5, 4}, rng);  // b stored transposed
  Tensor b({4, 5});
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t j = 0; j < 5; ++j) b[k * 5 + j] = bt[j * 4 + k];
  Tensor out({6, 5});
  gemm(matrix(a.values(), 6, 4), matrix(bt.values(), 5, 4).transposed(), as_matrix(out, 6));
  EXPECT_TRUE(bitwise_equal(out, naive_gemm(a, b)));
}

TEST(Gemm, RowBlocksComposeToOneShot) {
  std::mt19937_64 rng(8);
  const Tensor a = random_tensor({9, 7}, rng);
  const Tensor b = random_tensor({7, 6}, rng);
  Tensor blocked({9, 6});
  const auto av = matrix(a.values(), 9, 7);
  const auto bv = matrix(b.values(), 7, 6);
  const auto ov = as_matrix(blocked, 9);
  for (std::size_t r = 0; r < 9; r += 4) {
    const std::size_t n = std::min<std::size_t>(4, 9 - r);
    gemm(av.row_block(r, n), bv, ov.row_block(r, n));
  }
  EXPECT_TRUE(bitwise_equal(blocked, gemm(a, b)));
}

TEST(Im2col, OneByOneKernelIsReshape) {
  std::mt19937_64 rng(9);
  const Tensor x = random_tensor({3, 4, 5}, rng);
  const Tensor cols = im2col(x, ConvGeometry{3, 3, 1, 1});
  EXPECT_EQ(cols.dims(), (Shape{3, 20}));
  EXPECT_TRUE(bitwise_equal(cols.values(), x.values()));
}

TEST(Im2col, ZeroInputGivesZeroMatrix) {
  const Tensor cols = im2col(Tensor({2, 5, 5}), ConvGeometry{2, 4, 3, 3, 2, 1});
  for (float v : cols.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Im2col, CentreColumnOfPaddedThreeByThreeIsWholeImage) {
  const Tensor x = iota({1, 3, 3});
  const Tensor cols = im2col(x, ConvGeometry{1, 1, 3, 3, 1, 1});
  ASSERT_EQ(cols.dims(), (Shape{9, 9}));
  for (std::size_t r = 0; r < 9; ++r) EXPECT_EQ(cols[r * 9 + 4], static_cast<float>(r + 1));
  // Top-left output sees padding above and to the left.
  const float top_left[9] = {0, 0, 0, 0, 1, 2, 0, 4, 5};
  for (std::size_t r = 0; r < 9; ++r) EXPECT_EQ(cols[r * 9 + 0], top_left[r]);
  EXPECT_TRUE(bitwise_equal(cols, naive_im2col(x, ConvGeometry{1, 1, 3, 3, 1, 1})));
}

TEST(Im2col, MatchesReceptiveFieldEnumeration) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t c = testing::uniform(rng, 1, 4), k = testing::uniform(rng, 1, 4);
    const std::size_t s = testing::uniform(rng, 1, 3), p = testing::uniform(rng, 0, 2);
    const std::size_t h = testing::uniform(rng, k > 2 * p ? k - 2 * p : 1, 9);
    const std::size_t w = testing::uniform(rng, k > 2 * p ? k - 2 * p : 1, 9);
    const ConvGeometry g{c, 1, k, k, s, p};
    const Tensor x = random_tensor({c, h, w}, rng);
    EXPECT_TRUE(bitwise_equal(im2col(x, g), naive_im2col(x, g))) << "trial " << trial;
  }
}

TEST(Im2col, KernelLargerThanPaddedInputIsGeometryError) {
  EXPECT_THROW((void)im2col(Tensor({1, 2, 2}), ConvGeometry{1, 1, 5, 5, 1, 1}), GeometryError);
  EXPECT_THROW((ConvGeometry{1, 1, 3, 3, 0, 0}.validate()), GeometryError);
}

TEST(Col2im, InvertsIm2colForNonOverlappingKernel) {
  std::mt19937_64 rng(11);
  const Tensor x = random_tensor({3, 4, 6}, rng);
  const ConvGeometry g{3, 3, 1, 1};
  EXPECT_TRUE(bitwise_equal(col2im(im2col(x, g), g, 4, 6), x));
}

TEST(Col2im, IsTheAdjointOfIm2col) {
  std::mt19937_64 rng(12);
  const ConvGeometry g{2, 1, 3, 3, 2, 1};
  const Tensor x = random_tensor({2, 7, 6}, rng);
  const Tensor cols = im2col(x, g);
  const Tensor c = random_tensor(cols.dims(), rng);
  const double lhs = testing::dot(cols, c);
  const double rhs = testing::dot(x, col2im(c, g, 7, 6));
  EXPECT_NEAR(lhs, rhs, 1e-4 * std::max(1.0, std::abs(lhs)));
}

TEST(FlipCoeff, SingleCoefficientIsUnchanged) {
  EXPECT_EQ(flip_coeff(Tensor({1, 1, 1, 1}, {2.5f})), Tensor({1, 1, 1, 1}, {2.5f}));
}

TEST(FlipCoeff, ReversesSpatialKernel) {
  const Tensor flipped = flip_coeff(iota({1, 1, 3, 3}));
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(flipped[i], static_cast<float>(9 - i));
}

TEST(FlipCoeff, SwapsChannelAxesAndIsInvolution) {
  std::mt19937_64 rng(13);
  const Tensor w = random_tensor({4, 3, 2, 3}, rng);
  const Tensor f = flip_coeff(w);
  EXPECT_EQ(f.dims(), (Shape{3, 4, 2, 3}));
  EXPECT_TRUE(bitwise_equal(f, naive_flip(w)));
  EXPECT_TRUE(bitwise_equal(flip_coeff(f), w));
}

TEST(FlipCoeff, WrongRankIsShapeError) { EXPECT_THROW((void)flip_coeff(Tensor({3, 3})), ShapeError); }

}  // namespace
}  // namespace edgecl
