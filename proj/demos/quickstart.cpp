// Embeds a small taxonomy, trains the closed-form classifiers on a synthetic
// sample and prints test-set metrics.

#include <iostream>

#include "hierle/hierle.hpp"

int main() {
  using namespace hierle;

  const Tree tree = parse_tree(
      "C_1: C_1_1 C_1_2\n"
      "C_1_1: C_1_1_1 C_1_1_2\n"
      "C_1_2: C_1_2_1 C_1_2_2 C_1_2_3\n"
      "C_1_1_1: C_1_1_1_1 C_1_1_1_2\n");
  const EmbeddingTable emb = embed_tree(tree);
  std::cout << "embedding (K = " << emb.dimension() << ")\n" << embedding_to_text(tree, emb) << '\n';
  std::cout << "isometry error: " << verify_isometry(tree, build_schedule(tree), emb) << "\n\n";

  SyntheticSpec spec;
  spec.example = 1;
  spec.k = 3;
  spec.p = 15;
  spec.n_total = 400;
  spec.seed = 7;
  SyntheticData sd = generate(spec);
  const auto space = LabelSpace::make(std::move(sd.tree));
  const Splits s = split_1_1_2(sd.data);

  for (Method m : {Method::lin, Method::wl}) {
    double param = 0.0;
    const EvaluationReport r = run_method(m, space, s, ProtocolOptions{}, &param);
    std::cout << method_name(m) << (m == Method::wl ? " (gamma " + std::to_string(param) + ")" : std::string()) << '\n'
              << report_to_text(r) << '\n';
  }
  return 0;
}
