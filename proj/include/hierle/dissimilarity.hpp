#pragma once

// Tree dissimilarity built from parent-child weights (omega, geometric in the
// layer) and sibling weights (psi, one per parent), plus an exhaustive
// certification of the hierarchical and symmetric (H.S.) properties.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hierle/tree.hpp"

namespace hierle {

/// Default ratio between consecutive parent-child weights.
inline const double kDefaultDelta = std::sqrt(5.0);

/// Smallest delta for which the H.S. properties are guaranteed: delta^2 >= 2*sqrt(2) + 2.
inline double min_certified_delta() { return std::sqrt(2.0 * std::sqrt(2.0) + 2.0); }

struct WeightSchedule {
  /// omega[m-1] is the weight of an edge from a layer-m parent to its child, m = 1..k-1.
  std::vector<double> omega;
  double delta = kDefaultDelta;
  /// Sibling weight per node index; NaN for leaves.
  std::vector<double> psi;

  double omega_at(int m) const { return omega.at(static_cast<std::size_t>(m - 1)); }
  double omega1() const { return omega.empty() ? 1.0 : omega.front(); }
  bool certifiable() const { return delta * delta >= 2.0 * std::sqrt(2.0) + 2.0 - 1e-12; }
};

/// Sibling weight making the embedding exact: omega * sqrt(2N / (N - 1)).
inline double exact_sibling_weight(double omega_parent_layer, std::size_t n_children) {
  const double n = static_cast<double>(n_children);
  return omega_parent_layer * std::sqrt(2.0 * n / (n - 1.0));
}

inline WeightSchedule build_schedule(const Tree& tree, double omega1 = 1.0, double delta = kDefaultDelta) {
  if (!(delta > 1.0)) throw std::invalid_argument("build_schedule: delta must be > 1");
  if (!(omega1 > 0.0) || !std::isfinite(omega1)) throw std::invalid_argument("build_schedule: omega1 must be positive");
  WeightSchedule s;
  s.delta = delta;
  const int k = tree.depth();
  s.omega.resize(static_cast<std::size_t>(std::max(k - 1, 0)));
  for (int m = 1; m <= k - 1; ++m) s.omega[static_cast<std::size_t>(m - 1)] = m == 1 ? omega1 : s.omega[static_cast<std::size_t>(m - 2)] / delta;
  s.psi.assign(tree.size(), std::numeric_limits<double>::quiet_NaN());
  for (NodeIndex n = 0; n < tree.size(); ++n)
    if (!tree.is_leaf(n)) s.psi[n] = exact_sibling_weight(s.omega_at(tree.layer(n)), tree.child_count(n));
  return s;
}

/// Closed-form dissimilarity between two non-root nodes.
inline double dissimilarity(const Tree& tree, const WeightSchedule& sched, NodeIndex a, NodeIndex b) {
  tree.check(a);
  tree.check(b);
  if (a == Tree::root() || b == Tree::root()) throw std::invalid_argument("dissimilarity: the root has no dissimilarity");
  if (a == b) return 0.0;
  const int t = llca(tree, a, b);
  const int m = tree.layer(a), l = tree.layer(b);
  auto sq = [&](int i) { double w = sched.omega_at(i); return w * w; };
  if (t == std::min(m, l)) {
    double sum = 0.0;
    for (int i = t; i <= std::max(m, l) - 1; ++i) sum += sq(i);
    return std::sqrt(sum);
  }
  const double psi = sched.psi.at(tree.ancestor_at(a, t));
  double sum = psi * psi;
  for (int i = t + 1; i <= m - 1; ++i) sum += sq(i);
  for (int i = t + 1; i <= l - 1; ++i) sum += sq(i);
  return std::sqrt(sum);
}

struct HsViolation {
  enum class Property { hierarchical, symmetric } property;
  // The two pairs involved: (a1, b1) and (a2, b2).
  NodeIndex a1, b1, a2, b2;
  double value1, value2;
  std::string describe(const Tree& tree) const {
    auto pair = [&](NodeIndex x, NodeIndex y) { return "(" + tree.id(x) + ", " + tree.id(y) + ")"; };
    std::string what = property == Property::hierarchical ? "H.S.1" : "H.S.2";
    return what + ": d" + pair(a1, b1) + " = " + std::to_string(value1) + " vs d" + pair(a2, b2) + " = " + std::to_string(value2);
  }
};

struct HsReport {
  std::vector<HsViolation> violations;
  std::size_t pairs_checked = 0;
  bool certified() const { return violations.empty(); }
};

inline constexpr double kHsTolerance = 1e-10;

/// Exhaustive H.S. check over all distinct non-root pairs for an arbitrary
/// distance function.
///
/// (H.S.1) holds iff for every LLCA value t, the smallest distance among pairs
/// with LLCA t exceeds the largest distance among pairs with any larger LLCA,
/// so tracking per-LLCA extremes is exact. (H.S.2) groups, for each anchor
/// node, the other nodes by (LLCA, layer) and requires equal distances.
template <class Distance>
HsReport check_hs_with(const Tree& tree, Distance&& dist, double tol = kHsTolerance) {
  HsReport report;
  const std::size_t n = tree.size();
  const int k = tree.depth();
  struct Extreme {
    double value;
    NodeIndex a = 0, b = 0;
  };
  std::vector<Extreme> lo(static_cast<std::size_t>(k + 1), {std::numeric_limits<double>::infinity()});
  std::vector<Extreme> hi(static_cast<std::size_t>(k + 1), {-std::numeric_limits<double>::infinity()});
  std::vector<double> d(n * n, 0.0);
  for (NodeIndex a = 1; a < n; ++a) {
    for (NodeIndex b = a + 1; b < n; ++b) {
      const double v = dist(a, b);
      d[a * n + b] = d[b * n + a] = v;
      const auto t = static_cast<std::size_t>(llca(tree, a, b));
      if (v < lo[t].value) lo[t] = {v, a, b};
      if (v > hi[t].value) hi[t] = {v, a, b};
      ++report.pairs_checked;
    }
  }
  // Suffix maximum over larger LLCA values.
  Extreme best{-std::numeric_limits<double>::infinity()};
  for (int t = k; t >= 1; --t) {
    const auto ut = static_cast<std::size_t>(t);
    if (std::isfinite(lo[ut].value) && std::isfinite(best.value) && !(lo[ut].value > best.value + tol))
      report.violations.push_back({HsViolation::Property::hierarchical, lo[ut].a, lo[ut].b, best.a, best.b, lo[ut].value, best.value});
    if (hi[ut].value > best.value) best = hi[ut];
  }
  // (H.S.2): per anchor, first-seen distance for each (llca, layer) class.
  std::vector<double> first(static_cast<std::size_t>((k + 1) * (k + 1)));
  std::vector<NodeIndex> first_node(first.size());
  for (NodeIndex a = 1; a < n; ++a) {
    std::fill(first.begin(), first.end(), std::numeric_limits<double>::quiet_NaN());
    for (NodeIndex b = 1; b < n; ++b) {
      if (b == a) continue;
      const auto key = static_cast<std::size_t>(llca(tree, a, b) * (k + 1) + tree.layer(b));
      const double v = d[a * n + b];
      if (std::isnan(first[key])) {
        first[key] = v;
        first_node[key] = b;
      } else if (std::abs(first[key] - v) > tol) {
        report.violations.push_back({HsViolation::Property::symmetric, a, first_node[key], a, b, first[key], v});
      }
    }
  }
  return report;
}

inline HsReport check_hs(const Tree& tree, const WeightSchedule& sched) {
  return check_hs_with(tree, [&](NodeIndex a, NodeIndex b) { return dissimilarity(tree, sched, a, b); });
}

}  // namespace hierle
