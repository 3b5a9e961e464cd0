#pragma once

// Seeded synthetic benchmarks.
//
// Randomness comes from std::mt19937_64, whose output sequence is fixed by
// the standard. Uniform doubles take the top 53 bits, bounded integers use
// rejection sampling and normals use the Box-Muller transform, so a seed
// determines the generated data independently of the standard library's
// distribution implementations.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hierle/dataset.hpp"
#include "hierle/embedding.hpp"
#include "hierle/tree.hpp"

namespace hierle {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r < limit) return r % bound;
    }
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do u1 = uniform(); while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t next_u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of replication `rep` derived from a master seed (splitmix64 mix).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t rep) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (rep + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct SyntheticSpec {
  int example = 1;
  int k = 3;                 // depth, example 1 only
  std::size_t p = 15;        // feature dimension, example 1 only
  std::size_t n_total = 200;
  double noise_rate = 0.2;   // example 1 only
  double variance = 0.1;
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Tree tree;
  LabeledDataset data;
};

/// Complete tree with `top` children under the root and binary branching
/// below, `depth` layers. Node ids are their node-order positions, root "0".
inline Tree make_balanced_tree(std::size_t top, int depth) {
  if (depth < 2) throw std::invalid_argument("make_balanced_tree: depth must be >= 2");
  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  std::size_t next = 1;
  std::vector<std::size_t> frontier{0};
  for (int layer = 1; layer < depth; ++layer) {
    std::vector<std::size_t> below;
    for (std::size_t parent : frontier) {
      const std::size_t fan = layer == 1 ? top : 2;
      std::vector<std::string> kids;
      for (std::size_t j = 0; j < fan; ++j) {
        kids.push_back(std::to_string(next));
        below.push_back(next++);
      }
      groups.emplace_back(std::to_string(parent), std::move(kids));
    }
    frontier = std::move(below);
  }
  return Tree::from_groups(groups);
}

namespace detail {

inline void draw_uniform_leaves(const Tree& tree, Rng& rng, std::vector<NodeIndex>& labels, std::size_t n) {
  labels.resize(n);
  for (auto& l : labels) l = tree.leaves()[rng.below(tree.leaf_count())];
}

}  // namespace detail

/// Four second-layer nodes, binary below, `k` layers. Labels are uniform over
/// paths; the class mean puts 1/(m-1) on the coordinate of the path's layer-m
/// node (coordinate = node-order position). After sampling features, a
/// `noise_rate` share of samples, chosen without replacement, get a label
/// drawn uniformly over all paths.
inline SyntheticData gen_example1(const SyntheticSpec& spec) {
  if (spec.example != 1) throw std::invalid_argument("gen_example1: spec is not example 1");
  if (spec.k < 2) throw std::invalid_argument("gen_example1: k must be >= 2");
  if (!(spec.noise_rate >= 0.0 && spec.noise_rate < 1.0)) throw std::invalid_argument("gen_example1: noise_rate must be in [0, 1)");
  SyntheticData out{make_balanced_tree(4, spec.k), {}};
  const Tree& tree = out.tree;
  if (spec.p < tree.non_root_count())
    throw std::invalid_argument("gen_example1: p (" + std::to_string(spec.p) + ") must be at least the node count q (" +
                                std::to_string(tree.non_root_count()) + ")");
  Rng rng(spec.seed);
  auto& ds = out.data;
  detail::draw_uniform_leaves(tree, rng, ds.labels, spec.n_total);
  const double sd = std::sqrt(spec.variance);
  ds.X.resize(static_cast<Eigen::Index>(spec.n_total), static_cast<Eigen::Index>(spec.p));
  for (std::size_t i = 0; i < spec.n_total; ++i) {
    const Path y = path_of_leaf(tree, ds.labels[i]);
    for (std::size_t j = 0; j < spec.p; ++j) ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sd * rng.normal();
    for (std::size_t m = 1; m < y.nodes.size(); ++m)
      ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(y.nodes[m] - 1)) += 1.0 / static_cast<double>(m);
  }
  // Partial Fisher-Yates picks the noisy samples without replacement.
  const auto n_noisy = static_cast<std::size_t>(std::llround(spec.noise_rate * static_cast<double>(spec.n_total)));
  std::vector<std::size_t> idx(spec.n_total);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t s = 0; s < n_noisy; ++s) {
    std::swap(idx[s], idx[s + rng.below(spec.n_total - s)]);
    ds.labels[idx[s]] = tree.leaves()[rng.below(tree.leaf_count())];
  }
  return out;
}

/// Twelve second-layer nodes, binary below, five layers (96 leaves, p = 95).
/// Features are Gaussian around the leaf's embedded point.
inline SyntheticData gen_example2(const SyntheticSpec& spec) {
  if (spec.example != 2) throw std::invalid_argument("gen_example2: spec is not example 2");
  SyntheticData out{make_balanced_tree(12, 5), {}};
  const Tree& tree = out.tree;
  const EmbeddingTable emb = embed_tree(tree, 1.0, kDefaultDelta);
  const auto p = static_cast<Eigen::Index>(emb.dimension());
  Rng rng(spec.seed);
  auto& ds = out.data;
  detail::draw_uniform_leaves(tree, rng, ds.labels, spec.n_total);
  const double sd = std::sqrt(spec.variance);
  ds.X.resize(static_cast<Eigen::Index>(spec.n_total), p);
  for (std::size_t i = 0; i < spec.n_total; ++i) {
    const auto mean = emb.xi(ds.labels[i]);
    for (Eigen::Index j = 0; j < p; ++j) ds.X(static_cast<Eigen::Index>(i), j) = mean(j) + sd * rng.normal();
  }
  return out;
}

inline SyntheticData generate(const SyntheticSpec& spec) {
  if (spec.example == 1) return gen_example1(spec);
  if (spec.example == 2) return gen_example2(spec);
  throw std::invalid_argument("unknown example " + std::to_string(spec.example) + " (expected 1 or 2)");
}

}  // namespace hierle
