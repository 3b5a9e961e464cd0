#pragma once

// Angle-based top-down classification on the exact label embedding.
//
// A linear model maps x to f(x) = A * (1, x) in R^K. Prediction walks the
// taxonomy from the root, picking at each layer the child whose embedded
// point has the largest inner product with f(x). Trainers minimise
//   n^-1 sum_i V(f, z_i) + lambda * ||A||_F^2,
// where V sums a margin loss over every layer of the true path and every
// sibling competitor of the true node at that layer.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hierle/dataset.hpp"
#include "hierle/embedding.hpp"
#include "hierle/tree.hpp"

namespace hierle {

/// A taxonomy together with its embedding; shared by every model trained on it.
struct LabelSpace {
  Tree tree;
  EmbeddingTable embedding;
  /// Per node: sum over the path layers of sum_{siblings c} (xi_c - xi_node)
  /// evaluated along the root path of the node. Only leaf columns are used.
  Eigen::MatrixXd competitor_sum;

  static std::shared_ptr<const LabelSpace> make(Tree tree, double t1 = 1.0, double delta = kDefaultDelta) {
    auto s = std::make_shared<LabelSpace>();
    s->embedding = embed_tree(tree, t1, delta);
    s->tree = std::move(tree);
    const auto& t = s->tree;
    const auto& e = s->embedding;
    s->competitor_sum = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(e.dimension()), static_cast<Eigen::Index>(t.size()));
    for (NodeIndex n = 1; n < t.size(); ++n) {
      const NodeIndex p = t.parent(n);
      Eigen::VectorXd layer_term = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(e.dimension()));
      for (NodeIndex c : t.children(p))
        if (c != n) layer_term += e.xi(c) - e.xi(n);
      s->competitor_sum.col(static_cast<Eigen::Index>(n)) = s->competitor_sum.col(static_cast<Eigen::Index>(p)) + layer_term;
    }
    return s;
  }

  std::size_t dimension() const noexcept { return embedding.dimension(); }
};

enum class LossKind { linear, weighted_linear, hinge };

inline const char* to_string(LossKind k) {
  switch (k) {
    case LossKind::linear: return "linear";
    case LossKind::weighted_linear: return "wlinear";
    case LossKind::hinge: return "hinge";
  }
  return "?";
}

inline LossKind parse_loss(std::string_view s) {
  if (s == "linear" || s == "lin") return LossKind::linear;
  if (s == "wlinear" || s == "weighted-linear" || s == "wl") return LossKind::weighted_linear;
  if (s == "hinge") return LossKind::hinge;
  throw std::invalid_argument("unknown loss '" + std::string(s) + "' (expected linear, wlinear or hinge)");
}

/// Margin losses for surrogate_risk.
enum class MarginLoss { linear, hinge };

inline double apply_loss(MarginLoss loss, double u) {
  return loss == MarginLoss::linear ? -u : std::max(1.0 - u, 0.0);
}

struct LinearModel {
  std::shared_ptr<const LabelSpace> space;
  Eigen::MatrixXd A;  // K x (p + 1); column 0 multiplies the constant 1
  LossKind loss = LossKind::linear;
  std::optional<double> gamma;
  std::optional<double> lambda;

  std::size_t features() const noexcept { return static_cast<std::size_t>(A.cols()) - 1; }

  Eigen::VectorXd response(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    if (static_cast<std::size_t>(x.size()) != features())
      throw std::invalid_argument("feature dimension " + std::to_string(x.size()) + " does not match model (" + std::to_string(features()) + ")");
    return A.col(0) + A.rightCols(A.cols() - 1) * x;
  }

  /// f(x) for every row of X, as columns of a K x n matrix.
  Eigen::MatrixXd responses(const Eigen::MatrixXd& X) const {
    if (static_cast<std::size_t>(X.cols()) != features())
      throw std::invalid_argument("feature dimension " + std::to_string(X.cols()) + " does not match model (" + std::to_string(features()) + ")");
    Eigen::MatrixXd F = A.rightCols(A.cols() - 1) * X.transpose();
    F.colwise() += A.col(0);
    return F;
  }
};

/// (1, x) for every row: n x (p + 1).
inline Eigen::MatrixXd augment(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd out(X.rows(), X.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(X.cols()) = X;
  return out;
}

// --- prediction ---------------------------------------------------------

inline std::vector<double> decision_values(const LinearModel& model, const Eigen::Ref<const Eigen::VectorXd>& x,
                                           std::span<const NodeIndex> candidates) {
  const auto& tree = model.space->tree;
  if (!candidates.empty()) {
    const NodeIndex p = tree.parent(candidates.front());
    for (NodeIndex c : candidates)
      if (c == Tree::root() || tree.parent(c) != p) throw std::invalid_argument("decision_values: candidates must be siblings");
  }
  const Eigen::VectorXd f = model.response(x);
  std::vector<double> out;
  out.reserve(candidates.size());
  for (NodeIndex c : candidates) out.push_back(f.dot(model.space->embedding.xi(c)));
  return out;
}

/// Top-down walk for a given response vector f. Ties go to the leftmost child.
inline Path predict_from_response(const LabelSpace& space, const Eigen::Ref<const Eigen::VectorXd>& f) {
  if (static_cast<std::size_t>(f.size()) != space.dimension()) throw std::invalid_argument("response has wrong dimension");
  Path path;
  NodeIndex node = Tree::root();
  path.nodes.push_back(node);
  while (!space.tree.is_leaf(node)) {
    double best = -std::numeric_limits<double>::infinity();
    NodeIndex pick = space.tree.children(node).front();
    for (NodeIndex c : space.tree.children(node)) {
      const double v = f.dot(space.embedding.xi(c));
      if (v > best) {
        best = v;
        pick = c;
      }
    }
    node = pick;
    path.nodes.push_back(node);
  }
  return path;
}

inline Path predict_topdown(const LinearModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return predict_from_response(*model.space, model.response(x));
}

inline std::vector<Path> predict_all(const LinearModel& model, const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd F = model.responses(X);
  std::vector<Path> out;
  out.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < F.cols(); ++i) out.push_back(predict_from_response(*model.space, F.col(i)));
  return out;
}

inline void validate_path(const Tree& tree, const Path& y) {
  if (y.nodes.empty() || y.nodes.front() != Tree::root()) throw std::invalid_argument("path must start at the root");
  for (std::size_t i = 1; i < y.nodes.size(); ++i) {
    tree.check(y.nodes[i]);
    if (y.nodes[i] == Tree::root() || tree.parent(y.nodes[i]) != y.nodes[i - 1])
      throw std::invalid_argument("path is not a chain of children");
  }
  if (!tree.is_leaf(y.nodes.back())) throw std::invalid_argument("path does not end at a leaf");
}

/// min over layers m >= 2 and sibling competitors of <f, xi_true> - <f, xi_competitor>.
inline double margin_from_response(const LabelSpace& space, const Eigen::Ref<const Eigen::VectorXd>& f, const Path& y) {
  validate_path(space.tree, y);
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t m = 1; m < y.nodes.size(); ++m) {
    const NodeIndex truth = y.nodes[m];
    const double g_true = f.dot(space.embedding.xi(truth));
    for (NodeIndex c : space.tree.children(y.nodes[m - 1]))
      if (c != truth) margin = std::min(margin, g_true - f.dot(space.embedding.xi(c)));
  }
  return margin;
}

inline double hierarchy_margin(const LinearModel& model, const Eigen::Ref<const Eigen::VectorXd>& x, const Path& y) {
  return margin_from_response(*model.space, model.response(x), y);
}

/// V_loss(f, z) summed explicitly over layers and sibling competitors.
inline double path_surrogate(const LabelSpace& space, const Eigen::Ref<const Eigen::VectorXd>& f, const Path& y, MarginLoss loss) {
  double v = 0.0;
  for (std::size_t m = 1; m < y.nodes.size(); ++m) {
    const NodeIndex truth = y.nodes[m];
    const double g_true = f.dot(space.embedding.xi(truth));
    for (NodeIndex c : space.tree.children(y.nodes[m - 1]))
      if (c != truth) v += apply_loss(loss, g_true - f.dot(space.embedding.xi(c)));
  }
  return v;
}

/// n^-1 sum_i V_loss(f, z_i), optionally weighted per sample.
inline double surrogate_risk(const LinearModel& model, const LabeledDataset& data, MarginLoss loss,
                             std::span<const double> weights = {}) {
  const Eigen::MatrixXd F = model.responses(data.X);
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    total += w * path_surrogate(*model.space, F.col(static_cast<Eigen::Index>(i)), path_of_leaf(model.space->tree, data.labels[i]), loss);
  }
  return total / static_cast<double>(data.size());
}

// --- closed-form trainers -----------------------------------------------

namespace detail {

inline void check_training_data(const LabelSpace& space, const LabeledDataset& data) {
  validate_dataset(space.tree, data);
}

/// A = -B / (2 lambda), B = n^-1 sum_i w_i g(y_i) (1, x_i)^T.
inline Eigen::MatrixXd closed_form(const LabelSpace& space, const LabeledDataset& data, std::span<const double> weights, double lambda) {
  const auto n = static_cast<Eigen::Index>(data.size());
  Eigen::MatrixXd G(static_cast<Eigen::Index>(space.dimension()), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = weights.empty() ? 1.0 : weights[static_cast<std::size_t>(i)];
    G.col(i) = w * space.competitor_sum.col(static_cast<Eigen::Index>(data.labels[static_cast<std::size_t>(i)]));
  }
  Eigen::MatrixXd B(G.rows(), data.X.cols() + 1);
  B.col(0) = G.rowwise().sum();
  B.rightCols(data.X.cols()) = G * data.X;
  B /= static_cast<double>(n);
  return -B / (2.0 * lambda);
}

}  // namespace detail

inline LinearModel train_linear(std::shared_ptr<const LabelSpace> space, const LabeledDataset& data, double lambda = 1.0) {
  if (!(lambda > 0.0)) throw std::invalid_argument("train_linear: lambda must be positive");
  detail::check_training_data(*space, data);
  LinearModel m;
  m.A = detail::closed_form(*space, data, {}, lambda);
  m.space = std::move(space);
  m.loss = LossKind::linear;
  return m;
}

/// w_i = 1 / (1 + ||A_lin (1, x_i)||^gamma).
inline std::vector<double> adaptive_weights(const LinearModel& model_lin, const Eigen::MatrixXd& X, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("adaptive_weights: gamma must be positive");
  const Eigen::MatrixXd F = model_lin.responses(X);
  std::vector<double> w(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < F.cols(); ++i) w[static_cast<std::size_t>(i)] = 1.0 / (1.0 + std::pow(F.col(i).norm(), gamma));
  return w;
}

/// Weighted closed form for caller-supplied weights.
inline LinearModel train_weighted_linear_with(std::shared_ptr<const LabelSpace> space, const LabeledDataset& data,
                                              std::span<const double> weights, double lambda = 1.0) {
  if (!(lambda > 0.0)) throw std::invalid_argument("train_weighted_linear: lambda must be positive");
  detail::check_training_data(*space, data);
  if (weights.size() != data.size()) throw std::invalid_argument("train_weighted_linear: one weight per sample required");
  LinearModel m;
  m.A = detail::closed_form(*space, data, weights, lambda);
  m.space = std::move(space);
  m.loss = LossKind::weighted_linear;
  return m;
}

/// Two-stage adaptive weighted linear loss: fit the linear model, weight the
/// samples by its response norm, refit.
inline LinearModel train_weighted_linear(std::shared_ptr<const LabelSpace> space, const LabeledDataset& data, double gamma,
                                         double lambda = 1.0) {
  const LinearModel lin = train_linear(space, data);
  const auto w = adaptive_weights(lin, data.X, gamma);
  LinearModel m = train_weighted_linear_with(std::move(space), data, w, lambda);
  m.gamma = gamma;
  return m;
}

/// Same as train_weighted_linear but reuses an already fitted linear model.
inline LinearModel train_weighted_linear(const LinearModel& lin, const LabeledDataset& data, double gamma, double lambda = 1.0) {
  const auto w = adaptive_weights(lin, data.X, gamma);
  LinearModel m = train_weighted_linear_with(lin.space, data, w, lambda);
  m.gamma = gamma;
  return m;
}

// --- hinge loss -----------------------------------------------------------

struct HingeOptions {
  int max_iterations = 5000;
  /// Relative suboptimality target of each smoothing stage.
  double tolerance = 1e-8;
  /// Smoothing widths, applied in order with warm starts. The last one
  /// bounds the gap to the exact hinge objective.
  std::vector<double> smoothing = {1.0, 1e-1, 1e-2, 1e-3, 1e-4};
};

struct HingeResult {
  LinearModel model;
  double objective = 0.0;  // exact hinge objective at the returned A
  int iterations = 0;
  bool converged = false;
  /// Exact objective after each smoothing stage.
  std::vector<double> stage_objectives;
  /// Smoothed objective of the accepted iterate, per iteration.
  std::vector<double> history;
  /// history.size() at the end of each smoothing stage.
  std::vector<std::size_t> stage_ends;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double objective) : std::runtime_error(what), objective_(objective) {}
  double objective() const noexcept { return objective_; }

 private:
  double objective_;
};

namespace detail {

/// All (sample, competitor) margin terms of a dataset, stored as directions
/// d = xi_true - xi_competitor so that the margin is <d, f(x_i)>.
struct MarginTerms {
  Eigen::MatrixXd directions;        // K x T
  std::vector<Eigen::Index> sample;  // T
};

inline MarginTerms collect_terms(const LabelSpace& space, const LabeledDataset& data) {
  std::vector<Eigen::VectorXd> dirs;
  MarginTerms t;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Path y = path_of_leaf(space.tree, data.labels[i]);
    for (std::size_t m = 1; m < y.nodes.size(); ++m)
      for (NodeIndex c : space.tree.children(y.nodes[m - 1]))
        if (c != y.nodes[m]) {
          dirs.push_back(space.embedding.xi(y.nodes[m]) - space.embedding.xi(c));
          t.sample.push_back(static_cast<Eigen::Index>(i));
        }
  }
  t.directions.resize(static_cast<Eigen::Index>(space.dimension()), static_cast<Eigen::Index>(dirs.size()));
  for (std::size_t j = 0; j < dirs.size(); ++j) t.directions.col(static_cast<Eigen::Index>(j)) = dirs[j];
  return t;
}

class HingeProblem {
 public:
  HingeProblem(const LabelSpace& space, const LabeledDataset& data, double lambda)
      : terms_(collect_terms(space, data)), Xa_(augment(data.X)), lambda_(lambda), n_(static_cast<double>(data.size())) {}

  /// Exact objective when mu == 0, Huber-smoothed hinge otherwise.
  double value(const Eigen::MatrixXd& A, double mu) const {
    const Eigen::VectorXd u = margins(A);
    double loss = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) loss += smoothed(u(j), mu);
    return loss / n_ + lambda_ * A.squaredNorm();
  }

  double value_and_gradient(const Eigen::MatrixXd& A, double mu, Eigen::MatrixXd& grad) const {
    const Eigen::VectorXd u = margins(A);
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(A.rows(), Xa_.rows());
    double loss = 0.0;
    for (Eigen::Index j = 0; j < u.size(); ++j) {
      loss += smoothed(u(j), mu);
      const double s = slope(u(j), mu);
      if (s != 0.0) C.col(terms_.sample[static_cast<std::size_t>(j)]) += s * terms_.directions.col(j);
    }
    grad = C * Xa_ / n_ + 2.0 * lambda_ * A;
    return loss / n_ + lambda_ * A.squaredNorm();
  }

  /// Power-iteration estimate of the curvature of the data term at mu = 1.
  double curvature_estimate(Eigen::Index rows) const {
    Eigen::MatrixXd V = Eigen::MatrixXd::Constant(rows, Xa_.cols(), 1.0);
    double est = 1.0;
    for (int it = 0; it < 30; ++it) {
      V /= V.norm();
      const Eigen::VectorXd u = margins(V);
      Eigen::MatrixXd C = Eigen::MatrixXd::Zero(rows, Xa_.rows());
      for (Eigen::Index j = 0; j < u.size(); ++j) C.col(terms_.sample[static_cast<std::size_t>(j)]) += u(j) * terms_.directions.col(j);
      V = C * Xa_ / n_;
      est = V.norm();
      if (est == 0.0) return 1.0;
    }
    return est;
  }

  double lambda() const { return lambda_; }

 private:
  Eigen::VectorXd margins(const Eigen::MatrixXd& A) const {
    const Eigen::MatrixXd F = A * Xa_.transpose();  // K x n
    Eigen::VectorXd u(terms_.directions.cols());
    for (Eigen::Index j = 0; j < u.size(); ++j) u(j) = terms_.directions.col(j).dot(F.col(terms_.sample[static_cast<std::size_t>(j)]));
    return u;
  }

  static double smoothed(double u, double mu) {
    const double r = 1.0 - u;
    if (r <= 0.0) return 0.0;
    if (mu <= 0.0 || r >= mu) return r - mu / 2.0;
    return r * r / (2.0 * mu);
  }
  static double slope(double u, double mu) {
    const double r = 1.0 - u;
    if (r <= 0.0) return 0.0;
    if (mu <= 0.0 || r >= mu) return -1.0;
    return -r / mu;
  }

  MarginTerms terms_;
  Eigen::MatrixXd Xa_;
  double lambda_;
  double n_;
};

}  // namespace detail

/// Hinge-loss trainer: monotone accelerated gradient descent with
/// backtracking on a Huber-smoothed hinge, with the smoothing width shrunk
/// stage by stage. Each stage stops once the strong-convexity bound
/// ||grad||^2 / (4 lambda) certifies the requested relative suboptimality.
inline HingeResult train_hinge(std::shared_ptr<const LabelSpace> space, const LabeledDataset& data, double lambda,
                               const HingeOptions& opts = {}) {
  if (!(lambda > 0.0)) throw std::invalid_argument("train_hinge: lambda must be positive");
  if (opts.smoothing.empty()) throw std::invalid_argument("train_hinge: at least one smoothing stage required");
  detail::check_training_data(*space, data);
  const detail::HingeProblem problem(*space, data, lambda);
  const auto K = static_cast<Eigen::Index>(space->dimension());
  const auto cols = data.X.cols() + 1;

  HingeResult res;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(K, cols);
  const double base_curvature = problem.curvature_estimate(K);
  int used = 0;
  bool last_stage_converged = false;
  for (double mu : opts.smoothing) {
    double L = base_curvature / mu + 2.0 * lambda;
    Eigen::MatrixXd grad;
    double fx = problem.value_and_gradient(x, mu, grad);
    Eigen::MatrixXd y = x, x_prev = x;
    double t = 1.0;
    last_stage_converged = false;
    while (used < opts.max_iterations) {
      if (grad.squaredNorm() / (4.0 * lambda) <= opts.tolerance * std::max(1.0, std::abs(fx))) {
        last_stage_converged = true;
        break;
      }
      ++used;
      Eigen::MatrixXd gy;
      const double fy = problem.value_and_gradient(y, mu, gy);
      Eigen::MatrixXd z;
      double fz = 0.0;
      for (;;) {
        z = y - gy / L;
        fz = problem.value(z, mu);
        const Eigen::MatrixXd step = z - y;
        if (fz <= fy + (gy.array() * step.array()).sum() + 0.5 * L * step.squaredNorm() + 1e-15 * std::abs(fy)) break;
        L *= 2.0;
      }
      if (fz > fx) {
        // Momentum overshot: restart from the current iterate.
        t = 1.0;
        y = x;
      } else {
        const double t_next = (1.0 + std::sqrt(1.0 + 4.0 * t * t)) / 2.0;
        x_prev = x;
        x = z;
        fx = fz;
        y = x + ((t - 1.0) / t_next) * (x - x_prev);
        t = t_next;
      }
      res.history.push_back(fx);
      fx = problem.value_and_gradient(x, mu, grad);
    }
    res.stage_objectives.push_back(problem.value(x, 0.0));
    res.stage_ends.push_back(res.history.size());
  }
  res.iterations = used;
  res.converged = last_stage_converged;
  res.objective = problem.value(x, 0.0);
  res.model.A = std::move(x);
  res.model.space = std::move(space);
  res.model.loss = LossKind::hinge;
  res.model.lambda = lambda;
  return res;
}

/// Exact hinge objective n^-1 sum V_hinge + lambda ||A||_F^2 of any model.
inline double hinge_objective(const LinearModel& model, const LabeledDataset& data, double lambda) {
  return surrogate_risk(model, data, MarginLoss::hinge) + lambda * model.A.squaredNorm();
}

// --- population minimiser direction ----------------------------------------

/// sum_y P(y) sum_m N(parent of y_m) * eta(y_m): the direction of the
/// population minimiser of the linear-loss risk at a fixed x.
inline Eigen::VectorXd population_direction(const LabelSpace& space, std::span<const std::pair<Path, double>> path_probs) {
  double total = 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dimension()));
  for (const auto& [path, prob] : path_probs) {
    if (!(prob >= 0.0) || !std::isfinite(prob)) throw std::invalid_argument("population_direction: probabilities must be nonnegative");
    validate_path(space.tree, path);
    total += prob;
    for (std::size_t m = 1; m < path.nodes.size(); ++m) {
      const NodeIndex node = path.nodes[m];
      v += prob * static_cast<double>(space.tree.child_count(space.tree.parent(node))) * space.embedding.eta(node);
    }
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("population_direction: probabilities must sum to 1");
  return v;
}

}  // namespace hierle
