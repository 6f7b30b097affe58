#pragma once

// Training objectives of the three gradient-trained classifiers, as free
// functions over Eigen expressions. Targets are 0/1 (1 = Malignant) in every
// function; the hinge loss maps them to -1/+1 itself.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace minacc {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + e^z) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

/// Binary cross-entropy of sigmoid(z) against target y, written in terms of
/// the logit so it stays finite for saturated outputs.
inline double log_loss_from_logit(double z, double y) { return softplus(z) - y * z; }

// -- logistic regression: params = [w (d), b] ------------------------------

template <typename DX, typename DY>
double logistic_objective(const Eigen::VectorXd& params, const Eigen::MatrixBase<DX>& x,
                          const Eigen::MatrixBase<DY>& y) {
  const Eigen::Index d = x.cols();
  const Eigen::VectorXd z = (x * params.head(d)).array() + params[d];
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) total += log_loss_from_logit(z[i], y[i]);
  return total / static_cast<double>(x.rows());
}

template <typename DX, typename DY>
Eigen::VectorXd logistic_gradient(const Eigen::VectorXd& params, const Eigen::MatrixBase<DX>& x,
                                  const Eigen::MatrixBase<DY>& y) {
  const Eigen::Index d = x.cols();
  const auto n = static_cast<double>(x.rows());
  Eigen::VectorXd residual = (x * params.head(d)).array() + params[d];
  for (Eigen::Index i = 0; i < residual.size(); ++i) residual[i] = sigmoid(residual[i]) - y[i];
  Eigen::VectorXd grad(d + 1);
  grad.head(d) = x.transpose() * residual / n;
  grad[d] = residual.sum() / n;
  return grad;
}

// -- one-hidden-layer network ----------------------------------------------
//
// params = [W1 (hidden x inputs, row-major), b1 (hidden), w2 (hidden), b2],
// hidden activation tanh, output sigmoid, mean log-loss.

struct MlpShape {
  Eigen::Index inputs = 0;
  Eigen::Index hidden = 0;

  Eigen::Index parameter_count() const { return hidden * inputs + 2 * hidden + 1; }
};

using RowMajorMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MlpView {
  Eigen::Map<const RowMajorMatrixXd> w1;
  Eigen::Map<const Eigen::VectorXd> b1;
  Eigen::Map<const Eigen::VectorXd> w2;
  double b2;

  MlpView(const Eigen::VectorXd& params, const MlpShape& shape)
      : w1(params.data(), shape.hidden, shape.inputs),
        b1(params.data() + shape.hidden * shape.inputs, shape.hidden),
        w2(params.data() + shape.hidden * shape.inputs + shape.hidden, shape.hidden),
        b2(params[shape.parameter_count() - 1]) {}
};

/// Output logits for every row of x.
template <typename DX>
Eigen::VectorXd mlp_logits(const Eigen::VectorXd& params, const MlpShape& shape, const Eigen::MatrixBase<DX>& x) {
  const MlpView net(params, shape);
  const Eigen::MatrixXd hidden = ((x * net.w1.transpose()).rowwise() + net.b1.transpose()).array().tanh();
  return (hidden * net.w2).array() + net.b2;
}

template <typename DX, typename DY>
double mlp_objective(const Eigen::VectorXd& params, const MlpShape& shape, const Eigen::MatrixBase<DX>& x,
                     const Eigen::MatrixBase<DY>& y) {
  const Eigen::VectorXd z = mlp_logits(params, shape, x);
  double total = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) total += log_loss_from_logit(z[i], y[i]);
  return total / static_cast<double>(x.rows());
}

template <typename DX, typename DY>
Eigen::VectorXd mlp_gradient(const Eigen::VectorXd& params, const MlpShape& shape, const Eigen::MatrixBase<DX>& x,
                             const Eigen::MatrixBase<DY>& y) {
  const MlpView net(params, shape);
  const auto n = static_cast<double>(x.rows());
  const Eigen::MatrixXd hidden = ((x * net.w1.transpose()).rowwise() + net.b1.transpose()).array().tanh();
  Eigen::VectorXd dz = (hidden * net.w2).array() + net.b2;
  for (Eigen::Index i = 0; i < dz.size(); ++i) dz[i] = (sigmoid(dz[i]) - y[i]) / n;

  const Eigen::MatrixXd d_pre =
      ((dz * net.w2.transpose()).array() * (1.0 - hidden.array().square())).matrix();

  Eigen::VectorXd grad(shape.parameter_count());
  Eigen::Map<RowMajorMatrixXd>(grad.data(), shape.hidden, shape.inputs) = d_pre.transpose() * x;
  const Eigen::Index offset = shape.hidden * shape.inputs;
  grad.segment(offset, shape.hidden) = d_pre.colwise().sum().transpose();
  grad.segment(offset + shape.hidden, shape.hidden) = hidden.transpose() * dz;
  grad[shape.parameter_count() - 1] = dz.sum();
  return grad;
}

// -- linear SVM: params = [w (d), b] ---------------------------------------
//
// lambda/2 * |params|^2 + mean(max(0, 1 - s_i (w.x_i + b))), s_i = 2 y_i - 1.
// The bias is part of the regularised vector.

template <typename DX, typename DY>
double hinge_objective(const Eigen::VectorXd& params, const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                       double lambda) {
  const Eigen::Index d = x.cols();
  const Eigen::VectorXd f = (x * params.head(d)).array() + params[d];
  double hinge = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) hinge += std::max(0.0, 1.0 - (2.0 * y[i] - 1.0) * f[i]);
  return 0.5 * lambda * params.squaredNorm() + hinge / static_cast<double>(x.rows());
}

/// Subgradient; samples sitting exactly on the margin contribute nothing.
template <typename DX, typename DY>
Eigen::VectorXd hinge_subgradient(const Eigen::VectorXd& params, const Eigen::MatrixBase<DX>& x,
                                  const Eigen::MatrixBase<DY>& y, double lambda) {
  const Eigen::Index d = x.cols();
  const auto n = static_cast<double>(x.rows());
  Eigen::VectorXd grad = lambda * params;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double s = 2.0 * y[i] - 1.0;
    if (s * (x.row(i).dot(params.head(d)) + params[d]) < 1.0) {
      grad.head(d) -= (s / n) * x.row(i).transpose();
      grad[d] -= s / n;
    }
  }
  return grad;
}

}  // namespace minacc
