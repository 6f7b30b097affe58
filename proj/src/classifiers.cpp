#include "minacc/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "minacc/error.hpp"
#include "minacc/random.hpp"

namespace minacc {

namespace {

struct KindName {
  ClassifierKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 8> kKindNames = {{
    {ClassifierKind::RandomForest, "random-forest"},
    {ClassifierKind::SupportVectorMachine, "svm"},
    {ClassifierKind::KNearestNeighbor, "knn"},
    {ClassifierKind::NeuralNetwork, "neural-network"},
    {ClassifierKind::NaiveBayes, "naive-bayes"},
    {ClassifierKind::LogisticRegression, "logistic-regression"},
    {ClassifierKind::DecisionTreeEntropy, "decision-tree-entropy"},
    {ClassifierKind::DecisionTreeRegressor, "decision-tree-regressor"},
}};

[[noreturn]] void fail(ClassifierKind kind, const std::string& what) {
  throw Error(std::string(to_string(kind)) + ": " + what);
}

bool tolerates_single_class(ClassifierKind kind) {
  return kind == ClassifierKind::KNearestNeighbor || kind == ClassifierKind::DecisionTreeEntropy ||
         kind == ClassifierKind::DecisionTreeRegressor || kind == ClassifierKind::RandomForest;
}

double svm_lambda(double c, Eigen::Index n) { return 1.0 / (c * static_cast<double>(n)); }

KnnState fit_knn(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Hyperparams& hp) {
  return KnnState{x, y, hp.knn_k};
}

double knn_score(const KnnState& s, const Eigen::VectorXd& q) {
  const Eigen::VectorXd dist = (s.points.rowwise() - q.transpose()).rowwise().squaredNorm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dist.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(s.k), order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&dist](Eigen::Index a, Eigen::Index b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
  double votes = 0.0;
  for (std::size_t i = 0; i < k; ++i) votes += s.targets[order[i]];
  return votes / static_cast<double>(k);
}

NaiveBayesState fit_naive_bayes(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::Index d = x.cols();
  NaiveBayesState s;
  s.means.setZero(2, d);
  s.variances.setZero(2, d);
  Eigen::Vector2d counts = Eigen::Vector2d::Zero();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = y[i] > 0.5 ? 1 : 0;
    counts[c] += 1.0;
    s.means.row(c) += x.row(i);
  }
  for (int c = 0; c < 2; ++c) s.means.row(c) /= counts[c];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = y[i] > 0.5 ? 1 : 0;
    s.variances.row(c) += (x.row(i) - s.means.row(c)).array().square().matrix();
  }
  for (int c = 0; c < 2; ++c) {
    s.variances.row(c) /= counts[c];
    s.variances.row(c) = s.variances.row(c).cwiseMax(kNaiveBayesVarianceFloor);
  }
  s.log_priors = (counts / static_cast<double>(x.rows())).array().log();
  return s;
}

double naive_bayes_score(const NaiveBayesState& s, const Eigen::VectorXd& q) {
  Eigen::Vector2d log_joint;
  for (int c = 0; c < 2; ++c) {
    const Eigen::ArrayXd var = s.variances.row(c).transpose().array();
    const Eigen::ArrayXd diff = q.array() - s.means.row(c).transpose().array();
    log_joint[c] = s.log_priors[c] - 0.5 * ((2.0 * std::numbers::pi * var).log() + diff.square() / var).sum();
  }
  return sigmoid(log_joint[1] - log_joint[0]);
}

LinearState fit_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Hyperparams& hp) {
  // Stochastic subgradient descent on hinge_objective, step 1 / (lambda t),
  // one reshuffled pass over the samples per epoch.
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const double lambda = svm_lambda(hp.svm_c, n);
  Rng rng(hp.seed);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(d + 1);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  double t = 0.0;
  for (int epoch = 0; epoch < hp.svm_epochs; ++epoch) {
    rng.shuffle(std::span(order));
    for (const Eigen::Index i : order) {
      t += 1.0;
      const double eta = 1.0 / (lambda * t);
      const double s = 2.0 * y[i] - 1.0;
      const bool violated = s * (x.row(i).dot(params.head(d)) + params[d]) < 1.0;
      params *= 1.0 - eta * lambda;
      if (violated) {
        params.head(d) += (eta * s) * x.row(i).transpose();
        params[d] += eta * s;
      }
    }
  }
  return LinearState{std::move(params)};
}

MlpState fit_mlp(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Hyperparams& hp) {
  const MlpShape shape{x.cols(), hp.mlp_hidden};
  Rng rng(hp.seed);
  Eigen::VectorXd params = Eigen::VectorXd::Zero(shape.parameter_count());
  const double in_scale = 1.0 / std::sqrt(static_cast<double>(shape.inputs));
  const double out_scale = 1.0 / std::sqrt(static_cast<double>(shape.hidden));
  const Eigen::Index w1_size = shape.hidden * shape.inputs;
  for (Eigen::Index i = 0; i < w1_size; ++i) params[i] = rng.uniform(-0.5, 0.5) * in_scale;
  for (Eigen::Index i = 0; i < shape.hidden; ++i) params[w1_size + shape.hidden + i] = rng.uniform(-0.5, 0.5) * out_scale;

  for (int epoch = 0; epoch < hp.mlp_epochs; ++epoch) {
    params -= hp.mlp_learning_rate * mlp_gradient(params, shape, x, y);
  }
  return MlpState{shape, std::move(params)};
}

}  // namespace

std::string_view to_string(ClassifierKind kind) {
  for (const auto& entry : kKindNames) {
    if (entry.kind == kind) return entry.name;
  }
  return "unknown";
}

std::optional<ClassifierKind> parse_classifier(std::string_view name) {
  for (const auto& entry : kKindNames) {
    if (entry.name == name) return entry.kind;
  }
  return std::nullopt;
}

bool uses_standardization(ClassifierKind kind) {
  return kind == ClassifierKind::KNearestNeighbor || kind == ClassifierKind::SupportVectorMachine ||
         kind == ClassifierKind::LogisticRegression || kind == ClassifierKind::NeuralNetwork;
}

void Hyperparams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(std::string("invalid hyperparameter: ") + what);
  };
  require(knn_k > 0 && knn_k % 2 == 1, "knn_k must be a positive odd integer");
  require(svm_c > 0 && std::isfinite(svm_c), "svm_c must be positive");
  require(svm_epochs > 0, "svm_epochs must be positive");
  require(logreg_learning_rate > 0 && std::isfinite(logreg_learning_rate), "logreg_learning_rate must be positive");
  require(logreg_epochs > 0, "logreg_epochs must be positive");
  require(mlp_learning_rate > 0 && std::isfinite(mlp_learning_rate), "mlp_learning_rate must be positive");
  require(mlp_hidden > 0, "mlp_hidden must be positive");
  require(mlp_epochs > 0, "mlp_epochs must be positive");
  require(!tree_max_depth || *tree_max_depth > 0, "tree_max_depth must be positive");
  require(tree_min_samples_split >= 2, "tree_min_samples_split must be at least 2");
  require(forest_trees > 0, "forest_trees must be positive");
  require(forest_feature_subset > 0, "forest_feature_subset must be positive");
}

TrainedModel::TrainedModel(ClassifierKind kind, Eigen::Index dimension, State state,
                           std::optional<StandardizationParams> standardizer)
    : kind_(kind), dimension_(dimension), state_(std::move(state)), standardizer_(std::move(standardizer)) {}

Prediction TrainedModel::predict(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  if (features.size() != dimension_) {
    fail(kind_, "expected " + std::to_string(dimension_) + " features, got " + std::to_string(features.size()));
  }
  if (!features.allFinite()) fail(kind_, "non-finite feature in query");
  const double s = score(features);
  return Prediction{s > 0.5 ? Label::Malignant : Label::Benign, s};
}

double TrainedModel::score(const Eigen::Ref<const Eigen::VectorXd>& features) const {
  Eigen::VectorXd q = features;
  if (standardizer_) q = (q - standardizer_->means).cwiseQuotient(standardizer_->stddevs);

  switch (kind_) {
    case ClassifierKind::KNearestNeighbor:
      return knn_score(std::get<KnnState>(state_), q);
    case ClassifierKind::NaiveBayes:
      return naive_bayes_score(std::get<NaiveBayesState>(state_), q);
    case ClassifierKind::LogisticRegression:
    case ClassifierKind::SupportVectorMachine: {
      const Eigen::VectorXd& p = std::get<LinearState>(state_).params;
      return sigmoid(q.dot(p.head(dimension_)) + p[dimension_]);
    }
    case ClassifierKind::DecisionTreeEntropy:
    case ClassifierKind::DecisionTreeRegressor:
      return std::get<TreeState>(state_).tree.leaf_value(q);
    case ClassifierKind::RandomForest: {
      const auto& trees = std::get<ForestState>(state_).trees;
      double votes = 0.0;
      for (const DecisionTree& tree : trees) votes += tree.leaf_value(q) > 0.5 ? 1.0 : 0.0;
      return votes / static_cast<double>(trees.size());
    }
    case ClassifierKind::NeuralNetwork: {
      const auto& net = std::get<MlpState>(state_);
      return sigmoid(mlp_logits(net.params, net.shape, q.transpose())[0]);
    }
  }
  fail(kind_, "unknown classifier");
}

Eigen::VectorXd fit_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double learning_rate, int epochs,
                             std::vector<double>* loss_trace) {
  Eigen::VectorXd params = Eigen::VectorXd::Zero(x.cols() + 1);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    if (loss_trace) loss_trace->push_back(logistic_objective(params, x, y));
    params -= learning_rate * logistic_gradient(params, x, y);
  }
  if (loss_trace) loss_trace->push_back(logistic_objective(params, x, y));
  return params;
}

TrainedModel train(ClassifierKind kind, const Eigen::MatrixXd& x_raw, const Eigen::VectorXd& y,
                   const Hyperparams& hp) {
  hp.validate();
  const Eigen::Index n = x_raw.rows();
  if (y.size() != n) fail(kind, "target length does not match sample count");
  if (n < 1) fail(kind, "no training samples");
  if (!x_raw.allFinite()) fail(kind, "non-finite training feature");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) fail(kind, "targets must be 0 or 1");
  }
  const double positives = y.sum();
  const bool both_classes = positives > 0.0 && positives < static_cast<double>(n);
  if (!tolerates_single_class(kind)) {
    if (n < 2) fail(kind, "needs at least two training samples");
    if (!both_classes) fail(kind, "needs both classes in the training data");
  }

  std::optional<StandardizationParams> standardizer;
  Eigen::MatrixXd scaled;
  if (uses_standardization(kind)) {
    standardizer = fit_standardizer(x_raw);
    scaled = apply_standardizer(*standardizer, x_raw);
  }
  const Eigen::MatrixXd& x = standardizer ? scaled : x_raw;
  const Eigen::Index d = x.cols();

  TreeOptions tree_options;
  tree_options.max_depth = hp.tree_max_depth;
  tree_options.min_samples_split = hp.tree_min_samples_split;

  switch (kind) {
    case ClassifierKind::KNearestNeighbor:
      return TrainedModel(kind, d, fit_knn(x, y, hp), std::move(standardizer));
    case ClassifierKind::NaiveBayes:
      return TrainedModel(kind, d, fit_naive_bayes(x, y), std::move(standardizer));
    case ClassifierKind::LogisticRegression:
      return TrainedModel(kind, d, LinearState{fit_logistic(x, y, hp.logreg_learning_rate, hp.logreg_epochs)},
                          std::move(standardizer));
    case ClassifierKind::SupportVectorMachine:
      return TrainedModel(kind, d, fit_svm(x, y, hp), std::move(standardizer));
    case ClassifierKind::NeuralNetwork:
      return TrainedModel(kind, d, fit_mlp(x, y, hp), std::move(standardizer));
    case ClassifierKind::DecisionTreeEntropy:
    case ClassifierKind::DecisionTreeRegressor: {
      tree_options.criterion =
          kind == ClassifierKind::DecisionTreeEntropy ? SplitCriterion::Entropy : SplitCriterion::Variance;
      return TrainedModel(kind, d, TreeState{DecisionTree::grow(x, y, {}, tree_options)}, std::move(standardizer));
    }
    case ClassifierKind::RandomForest: {
      tree_options.criterion = SplitCriterion::Entropy;
      tree_options.feature_subset = hp.forest_feature_subset;
      Rng rng(hp.seed);
      ForestState forest;
      forest.trees.reserve(static_cast<std::size_t>(hp.forest_trees));
      std::vector<std::size_t> rows(static_cast<std::size_t>(n));
      for (int t = 0; t < hp.forest_trees; ++t) {
        if (hp.forest_bootstrap) {
          for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform_index(static_cast<std::uint64_t>(n)));
        } else {
          std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        forest.trees.push_back(DecisionTree::grow(x, y, rows, tree_options, &rng));
      }
      return TrainedModel(kind, d, std::move(forest), std::move(standardizer));
    }
  }
  fail(kind, "unknown classifier");
}

TrainedModel train(ClassifierKind kind, const Dataset& data, const Hyperparams& hp) {
  return train(kind, data.features(), data.targets(), hp);
}

Prediction predict(const TrainedModel& model, const Eigen::Ref<const Eigen::VectorXd>& features) {
  return model.predict(features);
}

Eigen::Index parameter_count(ClassifierKind kind, Eigen::Index d, const Hyperparams& hp) {
  switch (kind) {
    case ClassifierKind::LogisticRegression:
    case ClassifierKind::SupportVectorMachine:
      return d + 1;
    case ClassifierKind::NeuralNetwork:
      return MlpShape{d, hp.mlp_hidden}.parameter_count();
    default:
      fail(kind, "has no gradient-trained objective");
  }
}

namespace {

void check_gradient_inputs(ClassifierKind kind, const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
                           const Eigen::VectorXd& y, const Hyperparams& hp) {
  const Eigen::Index expected = parameter_count(kind, x.cols(), hp);
  if (params.size() != expected) {
    fail(kind, "expected " + std::to_string(expected) + " parameters, got " + std::to_string(params.size()));
  }
  if (x.rows() == 0 || y.size() != x.rows()) fail(kind, "batch is empty or targets do not match");
}

}  // namespace

double training_objective(ClassifierKind kind, const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
                          const Eigen::VectorXd& y, const Hyperparams& hp) {
  check_gradient_inputs(kind, params, x, y, hp);
  switch (kind) {
    case ClassifierKind::LogisticRegression:
      return logistic_objective(params, x, y);
    case ClassifierKind::NeuralNetwork:
      return mlp_objective(params, MlpShape{x.cols(), hp.mlp_hidden}, x, y);
    default:
      return hinge_objective(params, x, y, svm_lambda(hp.svm_c, x.rows()));
  }
}

Eigen::VectorXd loss_gradient(ClassifierKind kind, const Eigen::VectorXd& params, const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& y, const Hyperparams& hp) {
  check_gradient_inputs(kind, params, x, y, hp);
  switch (kind) {
    case ClassifierKind::LogisticRegression:
      return logistic_gradient(params, x, y);
    case ClassifierKind::NeuralNetwork:
      return mlp_gradient(params, MlpShape{x.cols(), hp.mlp_hidden}, x, y);
    default:
      return hinge_subgradient(params, x, y, svm_lambda(hp.svm_c, x.rows()));
  }
}

}  // namespace minacc
