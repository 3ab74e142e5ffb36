#include "lsml/forest.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <string>

#include "lsml/error.hpp"
#include "lsml/parallel.hpp"
#include "lsml/rng.hpp"

namespace lsml {

namespace {

// Stream tags keep the bootstrap and permutation streams apart.
constexpr std::uint64_t kBootstrapStream = 0x424F4F54;
constexpr std::uint64_t kPermuteStream = 0x5045524D;

void validate_training_data(const DataView& x, std::span<const double> y) {
  if (x.cols == 0) throw ArgumentError("fit: design matrix has no columns");
  if (x.values.size() % x.cols != 0) throw ArgumentError("fit: ragged design matrix");
  if (x.rows() != y.size()) throw ArgumentError("fit: row count and target length differ");
  if (y.size() < 2) throw ArgumentError("fit: at least two rows are required");
  if (y.size() > 0xFFFFFFF0u) throw ArgumentError("fit: too many rows");
  for (double v : x.values) {
    if (!std::isfinite(v)) throw ArgumentError("fit: non-finite feature value");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw ArgumentError("fit: non-finite target value");
  }
}

void validate_params(const ForestParams& p) {
  if (p.n_trees < 1) throw ArgumentError("forest: n_trees must be >= 1");
  if (p.min_samples_leaf < 1) throw ArgumentError("forest: min_samples_leaf must be >= 1");
  if (p.max_features < 0) throw ArgumentError("forest: max_features must be >= 0");
  if (p.max_depth < 0) throw ArgumentError("forest: max_depth must be >= 0");
}

// Column-major copy plus a per-feature row order, shared by all trees.
struct Presorted {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> columns;               // cols x rows
  std::vector<std::vector<std::uint32_t>> order;  // per feature, rows by value

  double value(std::size_t f, std::uint32_t r) const { return columns[f * rows + r]; }
};

Presorted presort(const DataView& x) {
  Presorted ps;
  ps.rows = x.rows();
  ps.cols = x.cols;
  ps.columns.resize(ps.rows * ps.cols);
  for (std::size_t r = 0; r < ps.rows; ++r) {
    for (std::size_t f = 0; f < ps.cols; ++f) ps.columns[f * ps.rows + r] = x(r, f);
  }
  ps.order.resize(ps.cols);
  parallel_for(ps.cols, [&](std::size_t f) {
    auto& order = ps.order[f];
    order.resize(ps.rows);
    std::iota(order.begin(), order.end(), 0u);
    const double* col = ps.columns.data() + f * ps.rows;
    std::stable_sort(order.begin(), order.end(),
                     [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
  });
  return ps;
}

class TreeBuilder {
 public:
  TreeBuilder(const Presorted& ps, std::span<const double> y, const ForestParams& params,
              std::span<const std::uint32_t> multiplicity, Rng& rng)
      : ps_(ps), y_(y), params_(params), rng_(rng) {
    n_ = 0;
    for (std::uint32_t m : multiplicity) n_ += m;
    sorted_.resize(ps.cols);
    for (std::size_t f = 0; f < ps.cols; ++f) {
      auto& s = sorted_[f];
      s.reserve(n_);
      for (std::uint32_t r : ps.order[f]) {
        for (std::uint32_t c = 0; c < multiplicity[r]; ++c) s.push_back(r);
      }
    }
    goes_left_.assign(ps.rows, 0);
    scratch_.resize(n_);
    features_.resize(ps.cols);
    std::iota(features_.begin(), features_.end(), 0u);
  }

  RegressionTree build() {
    struct Task {
      std::int32_t node;
      std::size_t begin;
      std::size_t end;
      int depth;
    };
    std::vector<TreeNode> nodes(1);
    std::vector<Task> stack = {{0, 0, n_, 0}};
    while (!stack.empty()) {
      const Task task = stack.back();
      stack.pop_back();
      const Split split = find_split(task.begin, task.end, task.depth);
      if (split.feature < 0) {
        nodes[static_cast<std::size_t>(task.node)].value = split.leaf_value;
        continue;
      }
      const auto left = static_cast<std::int32_t>(nodes.size());
      const std::int32_t right = left + 1;
      nodes.resize(nodes.size() + 2);
      TreeNode& node = nodes[static_cast<std::size_t>(task.node)];
      node.feature = split.feature;
      node.value = split.threshold;
      node.left = left;
      node.right = right;
      const std::size_t mid = partition(task.begin, task.end, split);
      stack.push_back({right, mid, task.end, task.depth + 1});
      stack.push_back({left, task.begin, mid, task.depth + 1});
    }
    return RegressionTree(std::move(nodes));
  }

 private:
  struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double leaf_value = 0.0;
  };

  Split find_split(std::size_t begin, std::size_t end, int depth) {
    Split result;
    const auto& rows = sorted_[0];
    const std::size_t n = end - begin;
    double sum = 0.0;
    double lo = y_[rows[begin]];
    double hi = lo;
    for (std::size_t p = begin; p < end; ++p) {
      const double v = y_[rows[p]];
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / static_cast<double>(n);
    result.leaf_value = lo == hi ? lo : std::clamp(mean, lo, hi);

    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (lo == hi) return result;
    if (n < 2 * min_leaf) return result;
    if (params_.max_depth > 0 && depth >= params_.max_depth) return result;

    const std::size_t n_features = ps_.cols;
    std::size_t n_candidates = n_features;
    if (params_.max_features > 0 && static_cast<std::size_t>(params_.max_features) < n_features) {
      n_candidates = static_cast<std::size_t>(params_.max_features);
      for (std::size_t a = 0; a < n_candidates; ++a) {
        const std::size_t b = a + uniform_index(rng_, n_features - a);
        std::swap(features_[a], features_[b]);
      }
    }
    candidates_.assign(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(n_candidates));
    std::sort(candidates_.begin(), candidates_.end());

    double centered_total = 0.0;
    for (std::size_t p = begin; p < end; ++p) centered_total += y_[rows[p]] - mean;

    double best = 0.0;
    for (std::uint32_t f : candidates_) {
      const auto& s = sorted_[f];
      const double* col = ps_.columns.data() + static_cast<std::size_t>(f) * ps_.rows;
      double left_sum = 0.0;
      for (std::size_t p = begin; p + 1 < end; ++p) {
        left_sum += y_[s[p]] - mean;
        const std::size_t n_left = p + 1 - begin;
        const std::size_t n_right = n - n_left;
        if (n_left < min_leaf) continue;
        if (n_right < min_leaf) break;
        const double a = col[s[p]];
        const double b = col[s[p + 1]];
        if (!(a < b)) continue;
        const double right_sum = centered_total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(n_left) +
                             right_sum * right_sum / static_cast<double>(n_right);
        if (score > best) {
          best = score;
          result.feature = static_cast<std::int32_t>(f);
          double t = a + (b - a) / 2.0;
          if (!(t >= a && t < b)) t = a;
          result.threshold = t;
        }
      }
    }
    return result;
  }

  std::size_t partition(std::size_t begin, std::size_t end, const Split& split) {
    const double* col = ps_.columns.data() + static_cast<std::size_t>(split.feature) * ps_.rows;
    const auto& ref = sorted_[0];
    std::size_t n_left = 0;
    for (std::size_t p = begin; p < end; ++p) {
      const std::uint32_t r = ref[p];
      const bool left = col[r] <= split.threshold;
      goes_left_[r] = left ? 1 : 0;
      n_left += left ? 1 : 0;
    }
    const std::size_t mid = begin + n_left;
    for (auto& s : sorted_) {
      std::size_t l = begin;
      std::size_t rpos = 0;
      for (std::size_t p = begin; p < end; ++p) {
        const std::uint32_t r = s[p];
        if (goes_left_[r]) {
          s[l++] = r;
        } else {
          scratch_[rpos++] = r;
        }
      }
      std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(rpos),
                s.begin() + static_cast<std::ptrdiff_t>(mid));
    }
    return mid;
  }

  const Presorted& ps_;
  std::span<const double> y_;
  const ForestParams& params_;
  Rng& rng_;
  std::size_t n_ = 0;
  std::vector<std::vector<std::uint32_t>> sorted_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::uint32_t> scratch_;
  std::vector<std::uint32_t> features_;
  std::vector<std::uint32_t> candidates_;
};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw FormatError("truncated forest table");
  return v;
}

constexpr std::array<char, 4> kForestMagic = {'L', 'S', 'R', 'F'};
constexpr std::uint32_t kForestVersion = 1;

}  // namespace

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw ArgumentError("tree has no nodes");
  const auto n = static_cast<std::int32_t>(nodes_.size());
  for (const TreeNode& node : nodes_) {
    if (node.is_leaf()) {
      if (!std::isfinite(node.value)) throw ArgumentError("tree leaf value is not finite");
    } else if (node.left <= 0 || node.right <= 0 || node.left >= n || node.right >= n) {
      throw ArgumentError("tree child index out of range");
    }
  }
}

RegressionTree RegressionTree::constant(double value) {
  TreeNode leaf;
  leaf.value = value;
  return RegressionTree({leaf});
}

double RegressionTree::predict(std::span<const double> row) const {
  std::size_t idx = 0;
  while (true) {
    const TreeNode& node = nodes_[idx];
    if (node.is_leaf()) return node.value;
    idx = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] <= node.value
                                       ? node.left
                                       : node.right);
  }
}

std::size_t RegressionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    deepest = std::max(deepest, level[n]);
    if (!nodes_[n].is_leaf()) {
      level[static_cast<std::size_t>(nodes_[n].left)] = level[n] + 1;
      level[static_cast<std::size_t>(nodes_[n].right)] = level[n] + 1;
    }
  }
  return deepest;
}

std::vector<std::int32_t> RegressionTree::used_features() const {
  std::vector<std::int32_t> f;
  for (const TreeNode& node : nodes_) {
    if (!node.is_leaf()) f.push_back(node.feature);
  }
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

Forest::Forest(ForestParams params, std::size_t n_features, std::vector<RegressionTree> trees,
               std::vector<std::vector<std::uint32_t>> oob_rows)
    : params_(params),
      n_features_(n_features),
      trees_(std::move(trees)),
      oob_rows_(std::move(oob_rows)) {
  if (trees_.empty()) throw ArgumentError("forest has no trees");
  if (!oob_rows_.empty() && oob_rows_.size() != trees_.size()) {
    throw ArgumentError("forest OOB bookkeeping does not match the tree count");
  }
  for (const auto& tree : trees_) {
    for (const TreeNode& node : tree.nodes()) {
      if (!node.is_leaf() && static_cast<std::size_t>(node.feature) >= n_features_) {
        throw ArgumentError("tree splits on a feature beyond the forest width");
      }
    }
  }
}

double Forest::predict(std::span<const double> row) const {
  if (row.size() != n_features_) {
    throw ArgumentError("predict: row has " + std::to_string(row.size()) +
                        " features, forest expects " + std::to_string(n_features_));
  }
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.predict(row);
  return sum / static_cast<double>(trees_.size());
}

std::vector<double> Forest::predict(const DataView& x) const {
  if (x.cols != n_features_) throw ArgumentError("predict: design matrix width mismatch");
  std::vector<double> out(x.rows());
  parallel_for(out.size(), [&](std::size_t r) { out[r] = predict(x.row(r)); });
  return out;
}

bool Forest::same_model(const Forest& other) const {
  return params_ == other.params_ && n_features_ == other.n_features_ && trees_ == other.trees_;
}

Forest fit_forest(const DataView& x, std::span<const double> y, const ForestParams& params) {
  validate_params(params);
  validate_training_data(x, y);
  const Presorted ps = presort(x);
  const std::size_t n = ps.rows;
  const auto n_trees = static_cast<std::size_t>(params.n_trees);

  std::vector<RegressionTree> trees(n_trees);
  std::vector<std::vector<std::uint32_t>> oob(n_trees);
  parallel_for(n_trees, [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, {kBootstrapStream, t}));
    std::vector<std::uint32_t> multiplicity(n, 0);
    for (std::size_t draw = 0; draw < n; ++draw) ++multiplicity[uniform_index(rng, n)];
    for (std::size_t r = 0; r < n; ++r) {
      if (multiplicity[r] == 0) oob[t].push_back(static_cast<std::uint32_t>(r));
    }
    TreeBuilder builder(ps, y, params, multiplicity, rng);
    trees[t] = builder.build();
  });
  return Forest(params, x.cols, std::move(trees), std::move(oob));
}

double oob_r2(const Forest& forest, const DataView& x, std::span<const double> y) {
  if (!forest.has_oob()) throw DiagnosticError("forest carries no out-of-bag bookkeeping");
  if (x.rows() != y.size() || x.cols != forest.n_features()) {
    throw ArgumentError("oob_r2: data does not match the forest");
  }
  const auto& trees = forest.trees();
  std::vector<std::vector<double>> per_tree(trees.size());
  parallel_for(trees.size(), [&](std::size_t t) {
    const auto& rows = forest.oob_rows()[t];
    per_tree[t].resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) per_tree[t][i] = trees[t].predict(x.row(rows[i]));
  });
  std::vector<double> sum(y.size(), 0.0);
  std::vector<std::uint32_t> count(y.size(), 0);
  for (std::size_t t = 0; t < trees.size(); ++t) {
    const auto& rows = forest.oob_rows()[t];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      sum[rows[i]] += per_tree[t][i];
      ++count[rows[i]];
    }
  }
  double y_sum = 0.0;
  std::size_t used = 0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    if (count[r] > 0) {
      y_sum += y[r];
      ++used;
    }
  }
  if (used == 0) throw DiagnosticError("no row is out of bag for any tree");
  const double y_mean = y_sum / static_cast<double>(used);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t r = 0; r < y.size(); ++r) {
    if (count[r] == 0) continue;
    const double pred = sum[r] / count[r];
    ss_res += (y[r] - pred) * (y[r] - pred);
    ss_tot += (y[r] - y_mean) * (y[r] - y_mean);
  }
  if (ss_tot <= 0.0) throw DiagnosticError("out-of-bag targets have zero variance");
  return 1.0 - ss_res / ss_tot;
}

std::vector<double> permutation_importance(const Forest& forest, const DataView& x,
                                           std::span<const double> y) {
  if (!forest.has_oob()) throw DiagnosticError("forest carries no out-of-bag bookkeeping");
  if (x.rows() != y.size() || x.cols != forest.n_features()) {
    throw ArgumentError("permutation_importance: data does not match the forest");
  }
  const auto& trees = forest.trees();
  const std::size_t n_features = forest.n_features();
  std::vector<std::vector<double>> increase(trees.size(), std::vector<double>(n_features, 0.0));
  std::vector<std::uint8_t> has_rows(trees.size(), 0);

  parallel_for(trees.size(), [&](std::size_t t) {
    const auto& rows = forest.oob_rows()[t];
    if (rows.empty()) return;
    has_rows[t] = 1;
    const RegressionTree& tree = trees[t];
    double base = 0.0;
    for (std::uint32_t r : rows) {
      const double e = tree.predict(x.row(r)) - y[r];
      base += e * e;
    }
    base /= static_cast<double>(rows.size());

    std::vector<double> buffer(n_features);
    std::vector<std::uint32_t> perm(rows.size());
    for (std::int32_t f : tree.used_features()) {
      const auto j = static_cast<std::size_t>(f);
      Rng rng(derive_seed(forest.params().seed, {kPermuteStream, t, j}));
      std::copy(rows.begin(), rows.end(), perm.begin());
      for (std::size_t a = perm.size(); a > 1; --a) {
        std::swap(perm[a - 1], perm[uniform_index(rng, a)]);
      }
      double permuted = 0.0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = x.row(rows[i]);
        std::copy(src.begin(), src.end(), buffer.begin());
        buffer[j] = x(perm[i], j);
        const double e = tree.predict(buffer) - y[rows[i]];
        permuted += e * e;
      }
      increase[t][j] = permuted / static_cast<double>(rows.size()) - base;
    }
  });

  std::size_t contributing = 0;
  std::vector<double> importance(n_features, 0.0);
  for (std::size_t t = 0; t < trees.size(); ++t) {
    if (!has_rows[t]) continue;
    ++contributing;
    for (std::size_t j = 0; j < n_features; ++j) importance[j] += increase[t][j];
  }
  if (contributing == 0) throw DiagnosticError("no tree has out-of-bag rows");
  double total = 0.0;
  for (double& v : importance) {
    v = std::max(0.0, v / static_cast<double>(contributing));
    total += v;
  }
  if (total > 0.0) {
    for (double& v : importance) v /= total;
  }
  return importance;
}

void write_forest(std::ostream& out, const Forest& forest) {
  out.write(kForestMagic.data(), kForestMagic.size());
  put<std::uint32_t>(out, kForestVersion);
  const ForestParams& p = forest.params();
  put<std::int32_t>(out, p.n_trees);
  put<std::int32_t>(out, p.max_features);
  put<std::int32_t>(out, p.min_samples_leaf);
  put<std::int32_t>(out, p.max_depth);
  put<std::uint64_t>(out, p.seed);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(forest.n_features()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(forest.trees().size()));
  for (const auto& tree : forest.trees()) {
    const auto& nodes = tree.nodes();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(nodes.size()));
    for (const auto& n : nodes) put<std::int32_t>(out, n.feature);
    for (const auto& n : nodes) put<double>(out, n.value);
    for (const auto& n : nodes) put<std::int32_t>(out, n.left);
    for (const auto& n : nodes) put<std::int32_t>(out, n.right);
  }
  if (!out) throw FormatError("forest write failed");
}

Forest read_forest(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kForestMagic) throw FormatError("not a forest table (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kForestVersion) {
    throw FormatError("unsupported forest table version " + std::to_string(version));
  }
  ForestParams p;
  p.n_trees = get<std::int32_t>(in);
  p.max_features = get<std::int32_t>(in);
  p.min_samples_leaf = get<std::int32_t>(in);
  p.max_depth = get<std::int32_t>(in);
  p.seed = get<std::uint64_t>(in);
  const auto n_features = get<std::uint32_t>(in);
  const auto n_trees = get<std::uint32_t>(in);
  if (n_trees == 0 || n_trees > (1u << 20)) throw FormatError("forest tree count out of range");
  std::vector<RegressionTree> trees;
  trees.reserve(n_trees);
  for (std::uint32_t t = 0; t < n_trees; ++t) {
    const auto n_nodes = get<std::uint32_t>(in);
    if (n_nodes == 0 || n_nodes > (1u << 28)) throw FormatError("tree node count out of range");
    std::vector<TreeNode> nodes(n_nodes);
    for (auto& n : nodes) n.feature = get<std::int32_t>(in);
    for (auto& n : nodes) n.value = get<double>(in);
    for (auto& n : nodes) n.left = get<std::int32_t>(in);
    for (auto& n : nodes) n.right = get<std::int32_t>(in);
    try {
      trees.emplace_back(std::move(nodes));
    } catch (const ArgumentError& e) {
      throw FormatError(std::string("invalid tree table: ") + e.what());
    }
  }
  try {
    return Forest(p, n_features, std::move(trees));
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("invalid forest table: ") + e.what());
  }
}

}  // namespace lsml
