#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "minacc/classifiers.hpp"
#include "minacc/error.hpp"
#include "minacc/random.hpp"

namespace minacc {

namespace {

// Candidate gains at or below this are treated as no improvement; it absorbs
// rounding in parent-minus-children differences.
constexpr double kMinGain = 1e-12;

struct NodeStats {
  double count = 0.0;
  double sum = 0.0;     // number of Malignant targets
  double sum_sq = 0.0;  // equals sum for 0/1 targets

  void add(double y) {
    count += 1.0;
    sum += y;
    sum_sq += y * y;
  }
};

double impurity(const NodeStats& s, SplitCriterion criterion) {
  if (criterion == SplitCriterion::Entropy) {
    const auto positives = static_cast<std::size_t>(std::llround(s.sum));
    const auto total = static_cast<std::size_t>(std::llround(s.count));
    return entropy(positives, total - positives);
  }
  const double mean = s.sum / s.count;
  return std::max(0.0, s.sum_sq / s.count - mean * mean);
}

}  // namespace

double entropy(std::size_t count_a, std::size_t count_b) {
  if (count_a == 0 && count_b == 0) throw Error("entropy of an empty node is undefined");
  const double total = static_cast<double>(count_a + count_b);
  double h = 0.0;
  for (const std::size_t c : {count_a, count_b}) {
    if (c == 0 || c == count_a + count_b) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

std::optional<SplitChoice> best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      std::span<const std::size_t> rows, SplitCriterion criterion,
                                      std::span<const int> features) {
  std::vector<std::size_t> all_rows;
  if (rows.empty()) {
    all_rows.resize(static_cast<std::size_t>(x.rows()));
    std::iota(all_rows.begin(), all_rows.end(), std::size_t{0});
    rows = all_rows;
  }
  if (rows.empty()) throw Error("best_split needs at least one sample");
  if (y.size() != x.rows()) throw Error("best_split: target length does not match sample count");

  std::vector<int> eligible;
  if (features.empty()) {
    eligible.resize(static_cast<std::size_t>(x.cols()));
    std::iota(eligible.begin(), eligible.end(), 0);
  } else {
    eligible.assign(features.begin(), features.end());
    std::ranges::sort(eligible);
  }

  NodeStats parent;
  for (std::size_t r : rows) parent.add(y[static_cast<Eigen::Index>(r)]);
  if (parent.sum == 0.0 || parent.sum == parent.count) return std::nullopt;
  const double parent_impurity = impurity(parent, criterion);

  std::optional<SplitChoice> best;
  std::vector<std::pair<double, double>> column(rows.size());
  for (const int f : eligible) {
    if (f < 0 || f >= x.cols()) throw Error("best_split: feature index out of range");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      column[i] = {x(r, f), y[r]};
    }
    std::ranges::sort(column, {}, &std::pair<double, double>::first);

    NodeStats left;
    for (std::size_t i = 0; i + 1 < column.size(); ++i) {
      left.add(column[i].second);
      const double lo = column[i].first;
      const double hi = column[i + 1].first;
      if (lo == hi) continue;

      const NodeStats right{parent.count - left.count, parent.sum - left.sum, parent.sum_sq - left.sum_sq};
      const double gain = parent_impurity - (left.count / parent.count) * impurity(left, criterion) -
                          (right.count / parent.count) * impurity(right, criterion);
      if (gain <= kMinGain || (best && gain <= best->gain)) continue;

      double threshold = lo + (hi - lo) / 2.0;
      if (!(threshold >= lo && threshold < hi)) threshold = lo;
      best = SplitChoice{f, threshold, gain};
    }
  }
  return best;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeOptions& options, Rng* rng,
              std::vector<TreeNode>& nodes)
      : x_(x), y_(y), options_(options), rng_(rng), nodes_(nodes) {}

  int build(std::vector<std::size_t> rows, int depth) {
    double positives = 0.0;
    for (std::size_t r : rows) positives += y_[static_cast<Eigen::Index>(r)];
    const auto index = static_cast<int>(nodes_.size());
    nodes_.push_back(TreeNode{.value = positives / static_cast<double>(rows.size())});

    const bool pure = positives == 0.0 || positives == static_cast<double>(rows.size());
    const bool too_small = rows.size() < static_cast<std::size_t>(options_.min_samples_split);
    const bool too_deep = options_.max_depth && depth >= *options_.max_depth;
    if (pure || too_small || too_deep) return index;

    const std::vector<int> features = draw_features();
    const auto split = best_split(x_, y_, rows, options_.criterion, features);
    if (!split) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (x_(static_cast<Eigen::Index>(r), split->feature) <= split->threshold ? left : right).push_back(r);
    }
    if (left.empty() || right.empty()) return index;
    rows.clear();
    rows.shrink_to_fit();

    const int left_index = build(std::move(left), depth + 1);
    const int right_index = build(std::move(right), depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = left_index;
    node.right = right_index;
    return index;
  }

 private:
  std::vector<int> draw_features() {
    const auto d = static_cast<int>(x_.cols());
    if (options_.feature_subset <= 0 || options_.feature_subset >= d) return {};
    if (rng_ == nullptr) throw Error("a random feature subset needs a generator");
    std::vector<int> pool(static_cast<std::size_t>(d));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < options_.feature_subset; ++i) {
      const auto j = i + static_cast<int>(rng_->uniform_index(static_cast<std::uint64_t>(d - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(options_.feature_subset));
    std::ranges::sort(pool);
    return pool;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  const TreeOptions& options_;
  Rng* rng_;
  std::vector<TreeNode>& nodes_;
};

}  // namespace

DecisionTree DecisionTree::grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const std::size_t> rows,
                                const TreeOptions& options, Rng* rng) {
  std::vector<std::size_t> start(rows.begin(), rows.end());
  if (start.empty()) {
    start.resize(static_cast<std::size_t>(x.rows()));
    std::iota(start.begin(), start.end(), std::size_t{0});
  }
  if (start.empty()) throw Error("cannot grow a tree on zero samples");

  DecisionTree tree;
  TreeBuilder(x, y, options, rng, tree.nodes_).build(std::move(start), 0);
  return tree;
}

int DecisionTree::depth() const {
  std::vector<std::pair<int, int>> stack{{0, 0}};
  int deepest = 0;
  while (!stack.empty()) {
    const auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return deepest;
}

}  // namespace minacc
