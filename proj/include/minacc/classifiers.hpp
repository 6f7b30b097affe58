#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "minacc/data.hpp"
#include "minacc/objectives.hpp"

namespace minacc {

class Rng;

enum class ClassifierKind {
  RandomForest,
  SupportVectorMachine,
  KNearestNeighbor,
  NeuralNetwork,
  NaiveBayes,
  LogisticRegression,
  DecisionTreeEntropy,
  DecisionTreeRegressor,
};

inline constexpr std::array<ClassifierKind, 8> kAllClassifiers = {
    ClassifierKind::RandomForest,       ClassifierKind::SupportVectorMachine, ClassifierKind::KNearestNeighbor,
    ClassifierKind::NeuralNetwork,      ClassifierKind::NaiveBayes,           ClassifierKind::LogisticRegression,
    ClassifierKind::DecisionTreeEntropy, ClassifierKind::DecisionTreeRegressor,
};

/// Command-line / file-name spelling, e.g. "random-forest".
std::string_view to_string(ClassifierKind kind);
std::optional<ClassifierKind> parse_classifier(std::string_view name);

/// k-NN, SVM, logistic regression and the network see z-scored inputs; trees,
/// the forest and Naive Bayes see raw features.
bool uses_standardization(ClassifierKind kind);

struct Hyperparams {
  int knn_k = 5;
  double svm_c = 1.0;
  int svm_epochs = 200;
  double logreg_learning_rate = 0.1;
  int logreg_epochs = 500;
  double mlp_learning_rate = 0.01;
  int mlp_hidden = 16;
  int mlp_epochs = 300;
  std::optional<int> tree_max_depth;  // unlimited when empty
  int tree_min_samples_split = 2;
  int forest_trees = 10;
  int forest_feature_subset = 5;
  bool forest_bootstrap = true;
  std::uint64_t seed = 0;

  /// Throws Error naming the first out-of-range field.
  void validate() const;

  bool operator==(const Hyperparams&) const = default;
};

// -- decision-tree building blocks -------------------------------------------

enum class SplitCriterion { Entropy, Variance };

/// Shannon entropy in bits of a two-class node.
double entropy(std::size_t count_a, std::size_t count_b);

struct SplitChoice {
  int feature = 0;
  double threshold = 0.0;
  double gain = 0.0;  // bits for Entropy, variance units for Variance
};

/// Best axis-aligned split of `rows` (all rows when empty) over `features`
/// (all columns when empty). Thresholds are midpoints between consecutive
/// distinct values; the left side takes values <= threshold. Ties go to the
/// lowest feature, then the lowest threshold. Returns nullopt for a pure node
/// or when no candidate has positive gain.
std::optional<SplitChoice> best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                      std::span<const std::size_t> rows, SplitCriterion criterion,
                                      std::span<const int> features = {});

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;  // fraction of Malignant training samples reaching a leaf

  bool is_leaf() const { return feature < 0; }
};

struct TreeOptions {
  SplitCriterion criterion = SplitCriterion::Entropy;
  std::optional<int> max_depth;
  int min_samples_split = 2;
  /// Features drawn per split; 0 or >= d means every feature.
  int feature_subset = 0;
};

/// Flat array of nodes, root at index 0.
class DecisionTree {
 public:
  /// `rng` is only consulted when options.feature_subset restricts features.
  static DecisionTree grow(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const std::size_t> rows,
                           const TreeOptions& options, Rng* rng = nullptr);

  template <typename Derived>
  double leaf_value(const Eigen::MatrixBase<Derived>& features) const {
    int i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
      const TreeNode& node = nodes_[static_cast<std::size_t>(i)];
      i = features[node.feature] <= node.threshold ? node.left : node.right;
    }
    return nodes_[static_cast<std::size_t>(i)].value;
  }

  std::span<const TreeNode> nodes() const { return nodes_; }
  int depth() const;

 private:
  std::vector<TreeNode> nodes_;
};

// -- fitted model state ------------------------------------------------------

struct KnnState {
  Eigen::MatrixXd points;
  Eigen::VectorXd targets;
  int k = 1;
};

struct NaiveBayesState {
  /// Row 0 = Benign, row 1 = Malignant.
  Eigen::Matrix<double, 2, Eigen::Dynamic> means;
  Eigen::Matrix<double, 2, Eigen::Dynamic> variances;
  Eigen::Vector2d log_priors;
};

inline constexpr double kNaiveBayesVarianceFloor = 1e-9;

/// Logistic regression and SVM: [w, b].
struct LinearState {
  Eigen::VectorXd params;
};

struct TreeState {
  DecisionTree tree;
};

struct ForestState {
  std::vector<DecisionTree> trees;
};

struct MlpState {
  MlpShape shape;
  Eigen::VectorXd params;
};

struct Prediction {
  Label label = Label::Benign;
  double score = 0.0;  // estimated P(Malignant) or vote share, in [0, 1]
};

/// A fitted classifier. Immutable; predictions are deterministic.
class TrainedModel {
 public:
  using State = std::variant<KnnState, NaiveBayesState, LinearState, TreeState, ForestState, MlpState>;

  TrainedModel(ClassifierKind kind, Eigen::Index dimension, State state,
               std::optional<StandardizationParams> standardizer);

  ClassifierKind kind() const { return kind_; }
  Eigen::Index dimension() const { return dimension_; }
  const State& state() const { return state_; }
  const std::optional<StandardizationParams>& standardizer() const { return standardizer_; }

  /// Label is Malignant iff score > 0.5.
  Prediction predict(const Eigen::Ref<const Eigen::VectorXd>& features) const;

 private:
  double score(const Eigen::Ref<const Eigen::VectorXd>& features) const;

  ClassifierKind kind_;
  Eigen::Index dimension_;
  State state_;
  std::optional<StandardizationParams> standardizer_;
};

/// Fits `kind` on rows of x with 0/1 targets y. Any feature dimension works;
/// the Dataset overload is the 30-feature WDBC case.
TrainedModel train(ClassifierKind kind, const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Hyperparams& hp);
TrainedModel train(ClassifierKind kind, const Dataset& data, const Hyperparams& hp);

Prediction predict(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& features);

/// Training objective of LogisticRegression, NeuralNetwork or
/// SupportVectorMachine at `params` over the batch. The network shape comes
/// from hp.mlp_hidden, the SVM regulariser from hp.svm_c and the batch size.
double training_objective(ClassifierKind kind, const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y, const Hyperparams& hp);

/// Analytic gradient of training_objective (a subgradient for the SVM).
Eigen::VectorXd loss_gradient(ClassifierKind kind, const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y, const Hyperparams& hp);

/// Parameter-vector length loss_gradient expects for a d-feature batch.
Eigen::Index parameter_count(ClassifierKind kind, Eigen::Index d, const Hyperparams& hp);

/// Full-batch gradient descent on the logistic objective from zero weights.
/// When `loss_trace` is given it receives the objective before each epoch
/// and once after the last.
Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double learning_rate, int epochs,
                             std::vector<double>* loss_trace = nullptr);

}  // namespace minacc
