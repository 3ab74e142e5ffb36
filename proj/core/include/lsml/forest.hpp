#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace lsml {

/// Row-major view of a design matrix.
struct DataView {
  std::span<const double> values;
  std::size_t cols = 0;

  std::size_t rows() const { return cols == 0 ? 0 : values.size() / cols; }
  std::span<const double> row(std::size_t r) const { return values.subspan(r * cols, cols); }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

struct ForestParams {
  int n_trees = 100;
  int max_features = 0;  ///< candidate features per node; 0 means all
  int min_samples_leaf = 1;
  int max_depth = 0;     ///< 0 means unlimited
  std::uint64_t seed = 0;

  bool operator==(const ForestParams&) const = default;
};

/// Array-encoded CART node. Internal nodes send rows with
/// x[feature] <= value to `left`; leaves (feature < 0) hold the mean target.
struct TreeNode {
  std::int32_t feature = -1;
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
 public:
  RegressionTree() = default;
  /// Validates child indices and leaf values; throws ArgumentError.
  explicit RegressionTree(std::vector<TreeNode> nodes);

  /// Single-leaf tree.
  static RegressionTree constant(double value);

  double predict(std::span<const double> row) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t depth() const;
  /// Features referenced by at least one split, ascending.
  std::vector<std::int32_t> used_features() const;

  bool operator==(const RegressionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
};

/// Bagged ensemble of regression trees with out-of-bag bookkeeping.
class Forest {
 public:
  Forest() = default;
  Forest(ForestParams params, std::size_t n_features, std::vector<RegressionTree> trees,
         std::vector<std::vector<std::uint32_t>> oob_rows = {});

  const ForestParams& params() const { return params_; }
  std::size_t n_features() const { return n_features_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  /// Training rows left out of each tree's bootstrap sample (empty for a
  /// forest read back from disk).
  const std::vector<std::vector<std::uint32_t>>& oob_rows() const { return oob_rows_; }
  bool has_oob() const { return !oob_rows_.empty(); }

  /// Mean of the trees' leaf values. Throws ArgumentError on a width mismatch.
  double predict(std::span<const double> row) const;
  std::vector<double> predict(const DataView& x) const;

  /// Equality of parameters, width and trees (OOB bookkeeping excluded).
  bool same_model(const Forest& other) const;

 private:
  ForestParams params_;
  std::size_t n_features_ = 0;
  std::vector<RegressionTree> trees_;
  std::vector<std::vector<std::uint32_t>> oob_rows_;
};

/// Bootstrap-aggregated CART regression with variance-reduction splits.
Forest fit_forest(const DataView& x, std::span<const double> y, const ForestParams& params);

/// R^2 of out-of-bag predictions; rows that are never out of bag are skipped.
double oob_r2(const Forest& forest, const DataView& x, std::span<const double> y);

/// Out-of-bag permutation importance per feature, negatives floored at zero
/// and normalized to sum to one (an all-zero vector stays zero).
std::vector<double> permutation_importance(const Forest& forest, const DataView& x,
                                           std::span<const double> y);

/// Binary little-endian tables; write -> read -> write is byte-identical.
void write_forest(std::ostream& out, const Forest& forest);
Forest read_forest(std::istream& in);

}  // namespace lsml
