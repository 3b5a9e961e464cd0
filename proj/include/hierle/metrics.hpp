#pragma once

// Hierarchical evaluation measures over (true path, predicted path) pairs.
// The root is on every path and never counts.

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hierle/tree.hpp"

namespace hierle {

struct PathPair {
  Path truth;
  Path predicted;
};

enum class HierarchicalWeighting { sibling, subtree };

struct EvaluationReport {
  double l01 = 0.0;
  double l_delta = 0.0;
  double l_h_sib = 0.0;
  double l_h_sub = 0.0;
  double hP = 0.0;
  double hR = 0.0;
  double hF = 0.0;
  std::size_t n_te = 0;
  double wall_time_seconds = 0.0;
};

namespace detail {

inline void require_pairs(std::span<const PathPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("metrics: no samples to evaluate");
}

/// Non-root nodes of a path, sorted by node index (node order).
inline std::vector<NodeIndex> node_set(const Path& p) {
  std::vector<NodeIndex> s(p.nodes.begin(), p.nodes.end());
  std::erase(s, Tree::root());
  std::sort(s.begin(), s.end());
  return s;
}

inline std::size_t intersection_size(const std::vector<NodeIndex>& a, const std::vector<NodeIndex>& b) {
  std::size_t i = 0, j = 0, n = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) ++i;
    else if (b[j] < a[i]) ++j;
    else { ++n; ++i; ++j; }
  }
  return n;
}

inline void check_path_nodes(const Tree& tree, const Path& p) {
  for (NodeIndex n : p.nodes) tree.check(n);
}

}  // namespace detail

inline double zero_one_loss(std::span<const PathPair> pairs) {
  detail::require_pairs(pairs);
  std::size_t wrong = 0;
  for (const auto& pr : pairs) wrong += pr.truth == pr.predicted ? 0 : 1;
  return static_cast<double>(wrong) / static_cast<double>(pairs.size());
}

/// Symmetric-difference size of one pair's non-root node sets.
inline std::size_t symmetric_difference_size(const Path& a, const Path& b) {
  const auto sa = detail::node_set(a), sb = detail::node_set(b);
  return sa.size() + sb.size() - 2 * detail::intersection_size(sa, sb);
}

inline double symmetric_loss(std::span<const PathPair> pairs) {
  detail::require_pairs(pairs);
  std::size_t total = 0;
  for (const auto& pr : pairs) total += symmetric_difference_size(pr.truth, pr.predicted);
  return static_cast<double>(total) / static_cast<double>(pairs.size());
}

/// Down-scaling coefficient v per node index (root = 1 for sibling weighting).
inline std::vector<double> hierarchical_coefficients(const Tree& tree, HierarchicalWeighting weighting) {
  std::vector<double> v(tree.size(), 1.0);
  const double q = static_cast<double>(tree.non_root_count());
  for (NodeIndex n = 1; n < tree.size(); ++n) {
    if (weighting == HierarchicalWeighting::sibling)
      v[n] = v[tree.parent(n)] / static_cast<double>(tree.child_count(tree.parent(n)));
    else
      v[n] = static_cast<double>(tree.subtree_size(n)) / q;
  }
  return v;
}

/// Contribution of one pair: the coefficient of the first node (in node
/// order) whose path-membership indicator differs, or 0 for equal paths.
inline double hierarchical_loss_single(const std::vector<double>& coeff, const Path& truth, const Path& predicted) {
  const auto st = detail::node_set(truth), sp = detail::node_set(predicted);
  std::size_t i = 0, j = 0;
  while (i < st.size() || j < sp.size()) {
    if (i < st.size() && j < sp.size() && st[i] == sp[j]) {
      ++i;
      ++j;
      continue;
    }
    NodeIndex first;
    if (i >= st.size()) first = sp[j];
    else if (j >= sp.size()) first = st[i];
    else first = std::min(st[i], sp[j]);
    return coeff.at(first);
  }
  return 0.0;
}

inline double hierarchical_loss(std::span<const PathPair> pairs, const Tree& tree, HierarchicalWeighting weighting) {
  detail::require_pairs(pairs);
  const auto coeff = hierarchical_coefficients(tree, weighting);
  double total = 0.0;
  for (const auto& pr : pairs) {
    detail::check_path_nodes(tree, pr.truth);
    detail::check_path_nodes(tree, pr.predicted);
    total += hierarchical_loss_single(coeff, pr.truth, pr.predicted);
  }
  return total / static_cast<double>(pairs.size());
}

struct HierarchicalF {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// Micro-averaged hierarchical precision/recall/F over ancestor-augmented
/// node sets. A root path is already closed under ancestors.
inline HierarchicalF h_fmeasure(std::span<const PathPair> pairs, const Tree& tree) {
  detail::require_pairs(pairs);
  std::size_t inter = 0, pred = 0, truth = 0;
  for (const auto& pr : pairs) {
    detail::check_path_nodes(tree, pr.truth);
    detail::check_path_nodes(tree, pr.predicted);
    const auto st = detail::node_set(pr.truth), sp = detail::node_set(pr.predicted);
    inter += detail::intersection_size(st, sp);
    pred += sp.size();
    truth += st.size();
  }
  HierarchicalF out;
  out.precision = pred ? static_cast<double>(inter) / static_cast<double>(pred) : 0.0;
  out.recall = truth ? static_cast<double>(inter) / static_cast<double>(truth) : 0.0;
  const double s = out.precision + out.recall;
  out.f = s > 0.0 ? 2.0 * out.precision * out.recall / s : 0.0;
  return out;
}

inline EvaluationReport evaluate(std::span<const PathPair> pairs, const Tree& tree) {
  EvaluationReport r;
  r.l01 = zero_one_loss(pairs);
  r.l_delta = symmetric_loss(pairs);
  r.l_h_sib = hierarchical_loss(pairs, tree, HierarchicalWeighting::sibling);
  r.l_h_sub = hierarchical_loss(pairs, tree, HierarchicalWeighting::subtree);
  const auto hf = h_fmeasure(pairs, tree);
  r.hP = hf.precision;
  r.hR = hf.recall;
  r.hF = hf.f;
  r.n_te = pairs.size();
  return r;
}

inline nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
  nlohmann::ordered_json j;
  j["n_te"] = r.n_te;
  j["l01"] = r.l01;
  j["l_delta"] = r.l_delta;
  j["l_h_sib"] = r.l_h_sib;
  j["l_h_sub"] = r.l_h_sub;
  j["hP"] = r.hP;
  j["hR"] = r.hR;
  j["hF"] = r.hF;
  j["wall_time_seconds"] = r.wall_time_seconds;
  return j;
}

inline std::string report_to_text(const EvaluationReport& r) {
  std::ostringstream os;
  os << std::left;
  auto row = [&](const char* name, double v) { os << std::setw(20) << name << std::fixed << std::setprecision(6) << v << '\n'; };
  os << std::setw(20) << "n_te" << r.n_te << '\n';
  row("l01", r.l01);
  row("l_delta", r.l_delta);
  row("l_h_sib", r.l_h_sib);
  row("l_h_sub", r.l_h_sub);
  row("hP", r.hP);
  row("hR", r.hR);
  row("hF", r.hF);
  row("wall_time_seconds", r.wall_time_seconds);
  return os.str();
}

}  // namespace hierle
