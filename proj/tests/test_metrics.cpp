#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace hierle;

namespace {

struct Fig1 {
  Tree t = oracle::figure1();
  Path leaf(const char* id) const { return path_of_leaf(t, t.index_of(id)); }
};

}  // namespace

TEST(ZeroOne, Counting) {
  Fig1 f;
  const Path a = f.leaf("C_1_2_1"), b = f.leaf("C_1_2_2");
  const std::vector<PathPair> pairs{{a, a}, {a, b}, {b, b}, {b, b}};
  EXPECT_DOUBLE_EQ(zero_one_loss(pairs), 0.25);
  const std::vector<PathPair> wrong{{a, b}, {b, a}};
  EXPECT_DOUBLE_EQ(zero_one_loss(wrong), 1.0);
  EXPECT_THROW(zero_one_loss(std::vector<PathPair>{}), std::invalid_argument);
}

TEST(Symmetric, HandDerivedValues) {
  Fig1 f;
  EXPECT_EQ(symmetric_difference_size(f.leaf("C_1_1_1_1"), f.leaf("C_1_2_1")), 5u);
  EXPECT_EQ(symmetric_difference_size(f.leaf("C_1_1_1_1"), f.leaf("C_1_1_1_2")), 2u);
  EXPECT_EQ(symmetric_difference_size(f.leaf("C_1_2_3"), f.leaf("C_1_2_3")), 0u);
  const std::vector<PathPair> pairs{{f.leaf("C_1_1_1_1"), f.leaf("C_1_2_1")}, {f.leaf("C_1_1_1_1"), f.leaf("C_1_1_1_2")}};
  EXPECT_DOUBLE_EQ(symmetric_loss(pairs), 3.5);
}

TEST(Hierarchical, SiblingWeighting) {
  Fig1 f;
  const std::vector<PathPair> one{{f.leaf("C_1_1_1_1"), f.leaf("C_1_2_1")}};
  EXPECT_DOUBLE_EQ(hierarchical_loss(one, f.t, HierarchicalWeighting::sibling), 0.5);
  const std::vector<PathPair> leaf_only{{f.leaf("C_1_1_1_1"), f.leaf("C_1_1_1_2")}};
  EXPECT_DOUBLE_EQ(hierarchical_loss(leaf_only, f.t, HierarchicalWeighting::sibling), 0.125);
  const std::vector<PathPair> three{{f.leaf("C_1_2_1"), f.leaf("C_1_2_3")}};
  EXPECT_DOUBLE_EQ(hierarchical_loss(three, f.t, HierarchicalWeighting::sibling), 1.0 / 6.0);
}

TEST(Hierarchical, SubtreeWeighting) {
  Fig1 f;
  const std::vector<PathPair> one{{f.leaf("C_1_1_1_1"), f.leaf("C_1_2_1")}};
  EXPECT_DOUBLE_EQ(hierarchical_loss(one, f.t, HierarchicalWeighting::subtree), 5.0 / 9.0);
  const std::vector<PathPair> leaf_only{{f.leaf("C_1_1_1_1"), f.leaf("C_1_1_1_2")}};
  EXPECT_DOUBLE_EQ(hierarchical_loss(leaf_only, f.t, HierarchicalWeighting::subtree), 1.0 / 9.0);
}

TEST(Hierarchical, CoefficientsTelescope) {
  Fig1 f;
  const auto v = hierarchical_coefficients(f.t, HierarchicalWeighting::sibling);
  EXPECT_DOUBLE_EQ(v[0], 1.0);
  for (NodeIndex p = 0; p < f.t.size(); ++p) {
    if (f.t.is_leaf(p)) continue;
    double sum = 0.0;
    for (NodeIndex c : f.t.children(p)) sum += v[c];
    EXPECT_NEAR(sum, v[p], 1e-15);
  }
}

TEST(Hierarchical, PerSampleContributionInUnitInterval) {
  std::mt19937_64 rng(3);
  for (int r = 0; r < 20; ++r) {
    const Tree t = oracle::random_tree(rng);
    const auto paths = all_paths(t);
    const auto v = hierarchical_coefficients(t, HierarchicalWeighting::sibling);
    for (const Path& a : paths)
      for (const Path& b : paths) {
        const double c = hierarchical_loss_single(v, a, b);
        EXPECT_GE(c, 0.0);
        EXPECT_LE(c, 1.0);
        EXPECT_EQ(c == 0.0, a == b);
      }
  }
}

TEST(HF, HandDerivedValues) {
  Fig1 f;
  const std::vector<PathPair> one{{f.leaf("C_1_1_1_1"), f.leaf("C_1_1_1_2")}};
  const auto h = h_fmeasure(one, f.t);
  EXPECT_DOUBLE_EQ(h.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(h.recall, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(h.f, 2.0 / 3.0);
  const std::vector<PathPair> disjoint{{f.leaf("C_1_1_1_1"), f.leaf("C_1_2_1")}};
  EXPECT_DOUBLE_EQ(h_fmeasure(disjoint, f.t).f, 0.0);
  const std::vector<PathPair> same{{f.leaf("C_1_2_2"), f.leaf("C_1_2_2")}};
  EXPECT_DOUBLE_EQ(h_fmeasure(same, f.t).f, 1.0);
}

TEST(HF, MicroAveragesOverUnequalLengths) {
  Fig1 f;
  // Truth sets of size 3 and 2; predictions of size 2 and 3.
  const std::vector<PathPair> pairs{{f.leaf("C_1_1_1_1"), f.leaf("C_1_1_2")}, {f.leaf("C_1_2_1"), f.leaf("C_1_1_1_2")}};
  const auto h = h_fmeasure(pairs, f.t);
  EXPECT_DOUBLE_EQ(h.precision, 1.0 / 5.0);
  EXPECT_DOUBLE_EQ(h.recall, 1.0 / 5.0);
}

TEST(Evaluate, ReportAndInvariants) {
  Fig1 f;
  const auto paths = all_paths(f.t);
  std::vector<PathPair> pairs;
  for (const Path& a : paths)
    for (const Path& b : paths) pairs.push_back({a, b});
  const auto r = evaluate(pairs, f.t);
  EXPECT_EQ(r.n_te, pairs.size());
  EXPECT_NEAR(r.hF, 2 * r.hP * r.hR / (r.hP + r.hR), 1e-15);
  std::vector<PathPair> reversed(pairs.rbegin(), pairs.rend());
  const auto r2 = evaluate(reversed, f.t);
  EXPECT_DOUBLE_EQ(r2.l01, r.l01);
  EXPECT_NEAR(r2.l_delta, r.l_delta, 1e-12);
  EXPECT_NEAR(r2.l_h_sub, r.l_h_sub, 1e-12);
  EXPECT_DOUBLE_EQ(r2.hF, r.hF);
  for (const auto& pr : pairs) {
    const auto d = symmetric_difference_size(pr.truth, pr.predicted);
    if (pr.truth != pr.predicted) {
      EXPECT_GE(d, pr.truth.length() == pr.predicted.length() ? 2u : 1u);
    }
  }
  std::vector<PathPair> perfect;
  for (const Path& a : paths) perfect.push_back({a, a});
  const auto p = evaluate(perfect, f.t);
  EXPECT_EQ(p.l01, 0.0);
  EXPECT_EQ(p.l_delta, 0.0);
  EXPECT_EQ(p.l_h_sib, 0.0);
  EXPECT_EQ(p.l_h_sub, 0.0);
  EXPECT_EQ(p.hF, 1.0);
}

TEST(Evaluate, Serialization) {
  Fig1 f;
  const std::vector<PathPair> one{{f.leaf("C_1_1_1_1"), f.leaf("C_1_2_1")}};
  const auto r = evaluate(one, f.t);
  const auto j = report_to_json(r);
  EXPECT_EQ(j["l_delta"], 5.0);
  EXPECT_EQ(j["n_te"], 1);
  EXPECT_NE(report_to_text(r).find("l_h_sib             0.500000"), std::string::npos);
}

TEST(Evaluate, NodesOutsideTreeRejected) {
  Fig1 f;
  Path bogus{{0, 42}};
  const std::vector<PathPair> pairs{{f.leaf("C_1_2_1"), bogus}};
  EXPECT_THROW(hierarchical_loss(pairs, f.t, HierarchicalWeighting::sibling), TaxonomyError);
  EXPECT_THROW(h_fmeasure(pairs, f.t), TaxonomyError);
}
