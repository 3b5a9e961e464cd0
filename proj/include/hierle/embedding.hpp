#pragma once

// Exact label embedding of a taxonomy into R^K, K = n_leaf - 1.
//
// Each parent's children are placed on a regular simplex of norm
// T(layer) = T1 / delta^(layer - 1), centred at the parent's vector and living
// in a coordinate block of size N - 1 that no other parent uses. With the
// sibling weights from build_schedule, Euclidean distances between embedded
// nodes equal the tree dissimilarity scaled by T1 / omega1.

#include <Eigen/Dense>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hierle/dissimilarity.hpp"
#include "hierle/tree.hpp"

namespace hierle {

/// `count` points in R^ambient with pairwise-equal distances and norm `norm`,
/// supported on coordinates [offset, offset + count - 1) (0-based). Columns
/// are the points. The first point has the negative leading coordinate.
inline Eigen::MatrixXd simplex(std::size_t count, double norm, std::size_t offset, std::size_t ambient) {
  if (count < 2) throw std::invalid_argument("simplex: need at least two points");
  if (ambient < offset + count - 1) throw std::invalid_argument("simplex: ambient dimension too small");
  if (!(norm > 0.0)) throw std::invalid_argument("simplex: norm must be positive");

  const std::size_t dim = count - 1;
  const double c = 1.0;
  Eigen::MatrixXd pts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
  pts(0, 0) = -c / 2.0;
  pts(0, 1) = c / 2.0;
  // Grow one point per step: the new point sits above the centroid of the
  // existing m points, at distance c from each of them.
  for (std::size_t m = 2; m <= dim; ++m) {
    const auto em = static_cast<Eigen::Index>(m);
    Eigen::VectorXd centroid = pts.leftCols(em).rowwise().sum() / static_cast<double>(m);
    const double spread = (centroid - pts.col(em - 1)).norm();
    Eigen::VectorXd next = centroid;
    next(em - 1) = std::sqrt(c * c - spread * spread);
    pts.col(em) = next;
  }
  Eigen::VectorXd centroid = pts.rowwise().mean();
  pts.colwise() -= centroid;
  const double q = static_cast<double>(count);
  const double natural_norm = c * std::sqrt((q - 1.0) / (2.0 * q));
  pts *= norm / natural_norm;

  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ambient), static_cast<Eigen::Index>(count));
  out.middleRows(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(dim)) = pts;
  return out;
}

struct CoordinateBlock {
  std::size_t start = 0;  // 0-based
  std::size_t size = 0;
};

class EmbeddingTable {
 public:
  std::size_t dimension() const noexcept { return static_cast<std::size_t>(xi_.rows()); }
  double t1() const noexcept { return t1_; }
  double delta() const noexcept { return delta_; }
  /// Simplex norm used for the children of a parent at layer m (m = 1..k-1).
  double layer_norm(int m) const { return layer_norms_.at(static_cast<std::size_t>(m - 1)); }
  const std::vector<double>& layer_norms() const noexcept { return layer_norms_; }

  /// Embedded point of a node; the root maps to the origin.
  auto xi(NodeIndex n) const { return xi_.col(static_cast<Eigen::Index>(n)); }
  /// Offset from the parent's point (equals xi for layer-2 nodes).
  auto eta(NodeIndex n) const { return eta_.col(static_cast<Eigen::Index>(n)); }
  /// K x (q+1) matrix; column 0 is the root.
  const Eigen::MatrixXd& points() const noexcept { return xi_; }
  /// Block holding the children of non-leaf node n; size 0 for leaves.
  const CoordinateBlock& block(NodeIndex n) const { return blocks_.at(n); }
  /// Dimension used after processing layers up to m (D_m), m = 2..k.
  std::size_t used_dimension(int m) const { return used_.at(static_cast<std::size_t>(m - 2)); }

  double distance(NodeIndex a, NodeIndex b) const { return (xi(a) - xi(b)).norm(); }

  friend EmbeddingTable embed_tree(const Tree& tree, double t1, double delta);

 private:
  Eigen::MatrixXd xi_;
  Eigen::MatrixXd eta_;
  std::vector<double> layer_norms_;
  std::vector<CoordinateBlock> blocks_;
  std::vector<std::size_t> used_;
  double t1_ = 1.0;
  double delta_ = kDefaultDelta;
};

inline EmbeddingTable embed_tree(const Tree& tree, double t1 = 1.0, double delta = kDefaultDelta) {
  if (!(delta > 1.0)) throw std::invalid_argument("embed_tree: delta must be > 1");
  if (!(t1 > 0.0) || !std::isfinite(t1)) throw std::invalid_argument("embed_tree: T1 must be positive");
  const std::size_t k_dim = tree.leaf_count() - 1;
  const auto cols = static_cast<Eigen::Index>(tree.size());
  EmbeddingTable e;
  e.t1_ = t1;
  e.delta_ = delta;
  e.xi_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k_dim), cols);
  e.eta_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k_dim), cols);
  e.blocks_.assign(tree.size(), {});
  for (int m = 1; m <= tree.depth() - 1; ++m) e.layer_norms_.push_back(m == 1 ? t1 : e.layer_norms_.back() / delta);

  // Breadth-first order visits the non-leaf parents of each layer left to
  // right before any parent of the next layer, so a running offset assigns
  // the blocks layer by layer.
  std::size_t offset = 0;
  int current_layer = 1;
  for (NodeIndex p = 0; p < tree.size(); ++p) {
    if (tree.layer(p) != current_layer) {
      e.used_.push_back(offset);
      current_layer = tree.layer(p);
    }
    if (tree.is_leaf(p)) continue;
    const auto kids = tree.children(p);
    const Eigen::MatrixXd eta = simplex(kids.size(), e.layer_norm(tree.layer(p)), offset, k_dim);
    e.blocks_[p] = {offset, kids.size() - 1};
    for (std::size_t j = 0; j < kids.size(); ++j) {
      const auto c = static_cast<Eigen::Index>(kids[j]);
      e.eta_.col(c) = eta.col(static_cast<Eigen::Index>(j));
      e.xi_.col(c) = e.xi_.col(static_cast<Eigen::Index>(p)) + e.eta_.col(c);
    }
    offset += kids.size() - 1;
  }
  if (offset != k_dim) throw std::logic_error("embed_tree: block layout does not fill n_leaf - 1 coordinates");
  return e;
}

/// Largest |s(a,b) - (omega1 / T1) * d_E(a,b)| over all non-root pairs.
inline double verify_isometry(const Tree& tree, const WeightSchedule& sched, const EmbeddingTable& table) {
  if (std::abs(sched.delta - table.delta()) > 1e-15 * table.delta())
    throw std::invalid_argument("verify_isometry: schedule and embedding use different delta");
  if (table.points().cols() != static_cast<Eigen::Index>(tree.size()))
    throw std::invalid_argument("verify_isometry: embedding does not belong to this tree");
  const double scale = sched.omega1() / table.t1();
  double worst = 0.0;
  for (NodeIndex a = 1; a < tree.size(); ++a)
    for (NodeIndex b = a; b < tree.size(); ++b)
      worst = std::max(worst, std::abs(dissimilarity(tree, sched, a, b) - scale * table.distance(a, b)));
  return worst;
}

inline HsReport embedded_hs_check(const Tree& tree, const EmbeddingTable& table) {
  return check_hs_with(tree, [&](NodeIndex a, NodeIndex b) { return table.distance(a, b); });
}

// --- export -------------------------------------------------------------

namespace detail {
inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}
}  // namespace detail

/// CSV: header row of node ids in node order, then one row per coordinate.
inline std::string embedding_to_csv(const Tree& tree, const EmbeddingTable& table) {
  std::string out;
  for (NodeIndex n = 1; n < tree.size(); ++n) {
    if (n > 1) out += ',';
    out += tree.id(n);
  }
  out += '\n';
  for (Eigen::Index r = 0; r < table.points().rows(); ++r) {
    for (NodeIndex n = 1; n < tree.size(); ++n) {
      if (n > 1) out += ',';
      out += detail::format_double(table.points()(r, static_cast<Eigen::Index>(n)));
    }
    out += '\n';
  }
  return out;
}

/// Aligned matrix text with node ids as the header line.
inline std::string embedding_to_text(const Tree& tree, const EmbeddingTable& table) {
  std::ostringstream os;
  constexpr int width = 14;
  for (NodeIndex n = 1; n < tree.size(); ++n) os << std::setw(width) << tree.id(n);
  os << '\n';
  os << std::fixed << std::setprecision(8);
  for (Eigen::Index r = 0; r < table.points().rows(); ++r) {
    for (NodeIndex n = 1; n < tree.size(); ++n) {
      double v = table.points()(r, static_cast<Eigen::Index>(n));
      os << std::setw(width) << (v == 0.0 ? 0.0 : v);
    }
    os << '\n';
  }
  return os.str();
}

/// JSON object: parameters plus node id -> coordinates in node order.
inline nlohmann::ordered_json embedding_to_json(const Tree& tree, const EmbeddingTable& table) {
  nlohmann::ordered_json j;
  j["T1"] = table.t1();
  j["delta"] = table.delta();
  j["K"] = table.dimension();
  nlohmann::ordered_json nodes = nlohmann::ordered_json::object();
  for (NodeIndex n = 1; n < tree.size(); ++n) {
    std::vector<double> v(table.dimension());
    for (std::size_t r = 0; r < v.size(); ++r) v[r] = table.points()(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(n));
    nodes[tree.id(n)] = v;
  }
  j["nodes"] = std::move(nodes);
  return j;
}

}  // namespace hierle
