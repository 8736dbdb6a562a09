#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "dsbgs/partition.hpp"
#include "oracles.hpp"

using namespace dsbgs;
using namespace dsbgs::testing;

namespace {

void expect_cover(const std::vector<IndexSet>& blocks, std::size_t dim) {
  IndexSet all;
  for (const auto& b : blocks) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  ASSERT_EQ(all.size(), dim);
  for (std::size_t i = 0; i < dim; ++i) EXPECT_EQ(all[i], i);
}

}  // namespace

TEST(UniformPartition, RaggedLastBlock) {
  const auto p = uniform_partition(5, 2);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p[0], (IndexSet{0, 1}));
  EXPECT_EQ(p[1], (IndexSet{2, 3}));
  EXPECT_EQ(p[2], (IndexSet{4}));
}

TEST(UniformPartition, SingleAndSingletonBlocks) {
  EXPECT_EQ(uniform_partition(4, 4), (std::vector<IndexSet>{{0, 1, 2, 3}}));
  EXPECT_EQ(uniform_partition(3, 1), (std::vector<IndexSet>{{0}, {1}, {2}}));
}

TEST(UniformPartition, RejectsBadBlockSize) {
  EXPECT_THROW(uniform_partition(3, 0), std::invalid_argument);
  EXPECT_THROW(uniform_partition(3, 4), std::invalid_argument);
}

TEST(UniformPartition, CoversForManySizes) {
  for (std::size_t dim = 1; dim <= 40; ++dim)
    for (std::size_t bs = 1; bs <= dim; ++bs) {
      const auto p = uniform_partition(dim, bs);
      EXPECT_EQ(p.size(), (dim + bs - 1) / bs);
      expect_cover(p, dim);
    }
}

TEST(BlockPartitionTest, RejectsInvalidUserPartitions) {
  EXPECT_THROW(BlockPartition(3, 1, {{0, 1}, {1, 2}}, {{0}}), std::invalid_argument);  // overlap
  EXPECT_THROW(BlockPartition(3, 1, {{0, 1}}, {{0}}), std::invalid_argument);          // gap
  EXPECT_THROW(BlockPartition(3, 1, {{1, 0}, {2}}, {{0}}), std::invalid_argument);     // order
  EXPECT_THROW(BlockPartition(3, 1, {{0, 1, 2}, {}}, {{0}}), std::invalid_argument);   // empty
  EXPECT_NO_THROW(BlockPartition(3, 2, {{0, 2}, {1}}, {{1}, {0}}));
}

TEST(Distribution, SingletonBlocksMatchEntrySquares) {
  const DenseMatrix A{{1, 2}, {3, 4}};
  const auto d = build_distribution(A, BlockPartition::uniform(2, 2, 1, 1));
  EXPECT_DOUBLE_EQ(d.total(), 30.0);
  EXPECT_DOUBLE_EQ(d.probability({0, 0}), 1.0 / 30);
  EXPECT_DOUBLE_EQ(d.probability({0, 1}), 4.0 / 30);
  EXPECT_DOUBLE_EQ(d.probability({1, 0}), 9.0 / 30);
  EXPECT_DOUBLE_EQ(d.probability({1, 1}), 16.0 / 30);
}

TEST(Distribution, SingleBlockHasProbabilityOne) {
  const DenseMatrix A{{1, 2}, {3, 4}};
  const auto d = build_distribution(A, BlockPartition::uniform(2, 2, 2, 2));
  EXPECT_DOUBLE_EQ(d.probability({0, 0}), 1.0);
}

TEST(Distribution, RowBlocksUseRowNorms) {
  Rng rng(1);
  const DenseMatrix A = random_matrix(7, 4, rng);
  const auto d = build_distribution(A, BlockPartition::uniform(7, 4, 1, 4));
  for (std::size_t i = 0; i < 7; ++i)
    EXPECT_NEAR(d.probability({i, 0}), norm2_sq(A.row(i)) / frobenius_norm_sq(A), 1e-15);
}

TEST(Distribution, NormalizationAndTotals) {
  Rng rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 1 + rng.next_u64() % 15, n = 1 + rng.next_u64() % 15;
    const DenseMatrix A = random_matrix(m, n, rng);
    const auto part = BlockPartition::uniform(m, n, 1 + rng.next_u64() % m, 1 + rng.next_u64() % n);
    const auto d = build_distribution(A, part);
    double psum = 0, tsum = 0;
    for (std::size_t i = 0; i < d.s(); ++i)
      for (std::size_t j = 0; j < d.t(); ++j) {
        psum += d.probability({i, j});
        tsum += d.frob_sq({i, j});
        EXPECT_NEAR(d.frob_sq({i, j}),
                    frobenius_norm_sq(submatrix(A, part.row_block(i), part.col_block(j))), 1e-12);
      }
    EXPECT_NEAR(psum, 1.0, 1e-12);
    EXPECT_NEAR(tsum, frobenius_norm_sq(A), 1e-12 * frobenius_norm_sq(A));
    EXPECT_TRUE(std::is_sorted(d.cumulative().begin(), d.cumulative().end()));
  }
}

TEST(Distribution, ZeroMatrixIsDegenerate) {
  EXPECT_THROW(build_distribution(DenseMatrix(2, 2), BlockPartition::uniform(2, 2, 1, 1)),
               std::invalid_argument);
}

TEST(Sampler, SingleBlockAlwaysSelected) {
  const auto d = build_distribution(DenseMatrix{{1, 2}}, BlockPartition::uniform(1, 2, 1, 2));
  BlockSampler s(d, 5);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(s(), (BlockIndex{0, 0}));
}

TEST(Sampler, NeverSelectsZeroBlock) {
  const DenseMatrix A{{0, 0}, {1, 1}};
  const auto d = build_distribution(A, BlockPartition::uniform(2, 2, 1, 2));
  BlockSampler s(d, 9);
  for (int i = 0; i < 100000; ++i) EXPECT_EQ(s().row, 1u);
  EXPECT_EQ(d.block_for(0.0), (BlockIndex{1, 0}));
  EXPECT_EQ(d.block_for(std::nextafter(1.0, 0.0)), (BlockIndex{1, 0}));
}

TEST(Sampler, DeterministicForSeed) {
  const DenseMatrix A{{1, 2}, {3, 4}};
  const auto d = build_distribution(A, BlockPartition::uniform(2, 2, 1, 1));
  BlockSampler a(d, 42), b(d, 42), c(d, 43);
  bool differs = false;
  for (int i = 0; i < 200; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    differs = differs || !(x == c());
  }
  EXPECT_TRUE(differs);
}

// Binomial 3-sigma interval on the frequency of the 16/30 block over 1e6 draws.
TEST(Sampler, BlockFrequencyWithinBinomialBand) {
  const DenseMatrix A{{1, 2}, {3, 4}};
  const auto d = build_distribution(A, BlockPartition::uniform(2, 2, 1, 1));
  BlockSampler s(d, 2024);
  const std::size_t draws = 1'000'000;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) hits += s() == BlockIndex{1, 1} ? 1 : 0;
  const double p = 16.0 / 30.0;
  const double sd = std::sqrt(p * (1 - p) / static_cast<double>(draws));
  EXPECT_NEAR(static_cast<double>(hits) / static_cast<double>(draws), p, 3 * sd);
}

TEST(Sampler, ChiSquareGoodnessOfFit) {
  const DenseMatrix A{{1, 2}, {3, 4}};
  const auto d = build_distribution(A, BlockPartition::uniform(2, 2, 1, 1));
  BlockSampler s(d, 77);
  const std::size_t draws = 100'000;
  std::map<std::size_t, std::size_t> counts;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto b = s();
    ++counts[b.row * 2 + b.col];
  }
  double chi2 = 0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double expected = d.probability({k / 2, k % 2}) * static_cast<double>(draws);
    const double diff = static_cast<double>(counts[k]) - expected;
    chi2 += diff * diff / expected;
  }
  const double critical = boost::math::quantile(boost::math::chi_squared(3), 1 - 1e-3);
  EXPECT_LT(chi2, critical);
}

TEST(Constants, BetaIsOneForRowColumnAndEntryBlocks) {
  Rng rng(6);
  const DenseMatrix A = random_matrix(6, 5, rng);
  EXPECT_DOUBLE_EQ(compute_constants(A, BlockPartition::uniform(6, 5, 1, 5)).beta, 1.0);
  EXPECT_DOUBLE_EQ(compute_constants(A, BlockPartition::uniform(6, 5, 1, 1)).beta, 1.0);
  EXPECT_DOUBLE_EQ(compute_constants(A, BlockPartition::uniform(6, 5, 6, 1)).beta, 1.0);
}

TEST(Constants, IdentitySingleBlock) {
  const auto c = compute_constants(DenseMatrix::identity(2), BlockPartition::uniform(2, 2, 2, 2));
  EXPECT_NEAR(c.beta, 0.5, 1e-14);
  EXPECT_NEAR(c.rho, 1.0, 1e-14);
}

TEST(Constants, BetaInUnitIntervalAndRhoIsMaxColumnBlockNorm) {
  Rng rng(12);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t m = 2 + rng.next_u64() % 10, n = 2 + rng.next_u64() % 10;
    const DenseMatrix A = random_matrix(m, n, rng);
    const auto part = BlockPartition::uniform(m, n, 1 + rng.next_u64() % m, 1 + rng.next_u64() % n);
    const auto c = compute_constants(A, part);
    EXPECT_GT(c.beta, 0.0);
    EXPECT_LE(c.beta, 1.0 + 1e-12);
    ASSERT_EQ(c.col_block_spectral_sq.size(), part.t());
    EXPECT_DOUBLE_EQ(c.rho, *std::max_element(c.col_block_spectral_sq.begin(), c.col_block_spectral_sq.end()));
  }
}

TEST(Constants, ZeroBlocksAreSkipped) {
  // Block (1,1) is zero; beta comes from the remaining blocks.
  const DenseMatrix A{{1, 1, 0, 0}, {1, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
  const auto c = compute_constants(A, BlockPartition::uniform(4, 4, 2, 2));
  EXPECT_NEAR(c.beta, 1.0, 1e-12);  // all-ones 2x2 is rank one
  EXPECT_THROW(compute_constants(DenseMatrix(2, 2), BlockPartition::uniform(2, 2, 1, 1)),
               std::invalid_argument);
}
