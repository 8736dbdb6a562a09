#pragma once

// Row/column partitions, the Frobenius-weighted block distribution, the block
// sampler and the partition constants beta and rho.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsbgs/linalg.hpp"
#include "dsbgs/random.hpp"

namespace dsbgs {

using IndexSet = std::vector<std::size_t>;  // zero-based, strictly increasing

namespace detail {

inline void validate_cover(const std::vector<IndexSet>& blocks, std::size_t dim, const char* what) {
  if (blocks.empty()) throw std::invalid_argument(std::string(what) + ": no blocks");
  std::vector<char> seen(dim, 0);
  std::size_t total = 0;
  for (const auto& blk : blocks) {
    if (blk.empty()) throw std::invalid_argument(std::string(what) + ": empty block");
    for (std::size_t k = 0; k < blk.size(); ++k) {
      if (blk[k] >= dim) throw std::invalid_argument(std::string(what) + ": index out of range");
      if (k > 0 && blk[k] <= blk[k - 1])
        throw std::invalid_argument(std::string(what) + ": block indices not strictly increasing");
      if (seen[blk[k]]) throw std::invalid_argument(std::string(what) + ": blocks overlap");
      seen[blk[k]] = 1;
    }
    total += blk.size();
  }
  if (total != dim) throw std::invalid_argument(std::string(what) + ": blocks do not cover all indices");
}

}  // namespace detail

/// Contiguous blocks of block_size indices; the last block takes the remainder.
inline std::vector<IndexSet> uniform_partition(std::size_t dim, std::size_t block_size) {
  if (block_size == 0 || block_size > dim)
    throw std::invalid_argument("uniform_partition: block size " + std::to_string(block_size) +
                                " not in [1, " + std::to_string(dim) + "]");
  std::vector<IndexSet> blocks;
  for (std::size_t start = 0; start < dim; start += block_size) {
    IndexSet blk(std::min(block_size, dim - start));
    std::iota(blk.begin(), blk.end(), start);
    blocks.push_back(std::move(blk));
  }
  return blocks;
}

/// Pair of partitions {I_1..I_s} of [m] and {J_1..J_t} of [n].
class BlockPartition {
public:
  BlockPartition(std::size_t m, std::size_t n, std::vector<IndexSet> row_blocks,
                 std::vector<IndexSet> col_blocks)
      : m_(m), n_(n), rows_(std::move(row_blocks)), cols_(std::move(col_blocks)) {
    detail::validate_cover(rows_, m_, "row partition");
    detail::validate_cover(cols_, n_, "column partition");
  }

  /// Uniform contiguous partition with row block size ell and column block size tau.
  static BlockPartition uniform(std::size_t m, std::size_t n, std::size_t ell, std::size_t tau) {
    return BlockPartition(m, n, uniform_partition(m, ell), uniform_partition(n, tau));
  }

  std::size_t rows() const noexcept { return m_; }
  std::size_t cols() const noexcept { return n_; }
  std::size_t s() const noexcept { return rows_.size(); }
  std::size_t t() const noexcept { return cols_.size(); }
  const IndexSet& row_block(std::size_t i) const { return rows_.at(i); }
  const IndexSet& col_block(std::size_t j) const { return cols_.at(j); }
  const std::vector<IndexSet>& row_blocks() const noexcept { return rows_; }
  const std::vector<IndexSet>& col_blocks() const noexcept { return cols_; }

private:
  std::size_t m_;
  std::size_t n_;
  std::vector<IndexSet> rows_;
  std::vector<IndexSet> cols_;
};

struct BlockIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const BlockIndex&, const BlockIndex&) = default;
};

inline void check_conforms(const DenseMatrix& A, const BlockPartition& part) {
  if (A.rows() != part.rows() || A.cols() != part.cols())
    throw std::invalid_argument("partition " + std::to_string(part.rows()) + "x" +
                                std::to_string(part.cols()) + " does not conform to matrix " +
                                std::to_string(A.rows()) + "x" + std::to_string(A.cols()));
}

/// ||A_{I,J}||_F^2 for every block, plus the cumulative array for sampling.
class BlockDistribution {
public:
  BlockDistribution(std::size_t s, std::size_t t, std::vector<double> table)
      : s_(s), t_(t), table_(std::move(table)) {
    if (table_.size() != s_ * t_) throw std::invalid_argument("BlockDistribution: table size");
    cumulative_.resize(table_.size());
    double acc = 0;
    for (std::size_t k = 0; k < table_.size(); ++k) {
      if (!(table_[k] >= 0.0)) throw std::invalid_argument("BlockDistribution: negative weight");
      acc += table_[k];
      cumulative_[k] = acc;
    }
    total_ = acc;
    if (!(total_ > 0.0)) throw std::invalid_argument("degenerate distribution");
    last_positive_ = table_.size() - 1;
    while (table_[last_positive_] == 0.0) --last_positive_;
  }

  std::size_t s() const noexcept { return s_; }
  std::size_t t() const noexcept { return t_; }
  double total() const noexcept { return total_; }
  double frob_sq(BlockIndex b) const { return table_.at(b.row * t_ + b.col); }
  double probability(BlockIndex b) const { return frob_sq(b) / total_; }
  const std::vector<double>& table() const noexcept { return table_; }
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }

  /// Inverse CDF: u in [0, 1) maps to the block whose cumulative interval holds u * total.
  BlockIndex block_for(double u) const {
    const double target = u * total_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
    std::size_t k = static_cast<std::size_t>(it - cumulative_.begin());
    if (k > last_positive_) k = last_positive_;
    return {k / t_, k % t_};
  }

private:
  std::size_t s_;
  std::size_t t_;
  std::vector<double> table_;
  std::vector<double> cumulative_;
  double total_ = 0;
  std::size_t last_positive_ = 0;
};

inline BlockDistribution build_distribution(const DenseMatrix& A, const BlockPartition& part) {
  check_conforms(A, part);
  // Accumulate per (row block, column block) with one pass over A.
  std::vector<std::size_t> col_owner(A.cols());
  for (std::size_t j = 0; j < part.t(); ++j)
    for (std::size_t c : part.col_block(j)) col_owner[c] = j;
  std::vector<double> table(part.s() * part.t(), 0.0);
  for (std::size_t i = 0; i < part.s(); ++i) {
    double* slot = table.data() + i * part.t();
    for (std::size_t r : part.row_block(i)) {
      const auto row = A.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) slot[col_owner[c]] += row[c] * row[c];
    }
  }
  return BlockDistribution(part.s(), part.t(), std::move(table));
}

/// Draws blocks i.i.d. (with replacement) from a BlockDistribution.
/// Owns its random stream; one sampler per thread.
class BlockSampler {
public:
  BlockSampler(const BlockDistribution& dist, std::uint64_t seed) : dist_(&dist), rng_(seed) {}

  BlockIndex operator()() { return dist_->block_for(rng_.uniform01()); }

private:
  const BlockDistribution* dist_;
  Rng rng_;
};

inline BlockIndex sample_block(const BlockDistribution& dist, Rng& rng) {
  return dist.block_for(rng.uniform01());
}

struct PartitionConstants {
  double beta = 0;  // max over blocks of ||A_IJ||_2^2 / ||A_IJ||_F^2
  double rho = 0;   // max over column blocks of sigma_1^2(A_{:,J})
  std::vector<double> col_block_spectral_sq;
};

/// beta over blocks with nonzero Frobenius norm, and rho.
inline PartitionConstants compute_constants(const DenseMatrix& A, const BlockPartition& part) {
  const BlockDistribution dist = build_distribution(A, part);
  PartitionConstants c;
  for (std::size_t i = 0; i < part.s(); ++i) {
    for (std::size_t j = 0; j < part.t(); ++j) {
      const double f = dist.frob_sq({i, j});
      if (f == 0.0) continue;
      const std::size_t bi = part.row_block(i).size();
      const std::size_t bj = part.col_block(j).size();
      // Rank-one blocks have spectral norm equal to Frobenius norm.
      const double ratio =
          (bi == 1 || bj == 1)
              ? 1.0
              : spectral_norm_sq(submatrix(A, part.row_block(i), part.col_block(j))) / f;
      c.beta = std::max(c.beta, ratio);
    }
  }
  IndexSet all_rows(A.rows());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  for (std::size_t j = 0; j < part.t(); ++j) {
    const double sq = spectral_norm_sq(submatrix(A, all_rows, part.col_block(j)));
    c.col_block_spectral_sq.push_back(sq);
    c.rho = std::max(c.rho, sq);
  }
  return c;
}

}  // namespace dsbgs
