#pragma once

// JSON persistence for linear models. The taxonomy document travels with the
// model so a saved model can be used without the original tree file; the
// tree hash guards against pairing a model with a different taxonomy.

#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "hierle/classifier.hpp"

namespace hierle {

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::ordered_json model_to_json(const LinearModel& model) {
  nlohmann::ordered_json j;
  j["format"] = "hierle-model";
  j["version"] = 1;
  j["tree_hash"] = model.space->tree.hash();
  j["taxonomy"] = model.space->tree.to_document();
  j["embedding"] = {{"T1", model.space->embedding.t1()}, {"delta", model.space->embedding.delta()}};
  j["loss"] = to_string(model.loss);
  if (model.gamma) j["gamma"] = *model.gamma;
  if (model.lambda) j["lambda"] = *model.lambda;
  j["K"] = model.A.rows();
  j["p"] = model.A.cols() - 1;
  std::vector<double> a;
  a.reserve(static_cast<std::size_t>(model.A.size()));
  for (Eigen::Index r = 0; r < model.A.rows(); ++r)
    for (Eigen::Index c = 0; c < model.A.cols(); ++c) a.push_back(model.A(r, c));
  j["A"] = std::move(a);
  return j;
}

inline LinearModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "hierle-model") throw ModelFormatError("not a hierle model document");
    if (j.at("version").get<int>() != 1) throw ModelFormatError("unsupported model version");
    Tree tree = parse_tree(j.at("taxonomy").get<std::string>());
    if (tree.hash() != j.at("tree_hash").get<std::string>()) throw ModelFormatError("taxonomy does not match tree_hash");
    const double t1 = j.at("embedding").at("T1").get<double>();
    const double delta = j.at("embedding").at("delta").get<double>();
    LinearModel m;
    m.space = LabelSpace::make(std::move(tree), t1, delta);
    m.loss = parse_loss(j.at("loss").get<std::string>());
    if (j.contains("gamma")) m.gamma = j["gamma"].get<double>();
    if (j.contains("lambda")) m.lambda = j["lambda"].get<double>();
    const auto K = j.at("K").get<Eigen::Index>();
    const auto p = j.at("p").get<Eigen::Index>();
    if (static_cast<std::size_t>(K) != m.space->dimension()) throw ModelFormatError("K does not match the taxonomy");
    const auto a = j.at("A").get<std::vector<double>>();
    if (p < 1 || a.size() != static_cast<std::size_t>(K * (p + 1))) throw ModelFormatError("coefficient array has the wrong size");
    m.A.resize(K, p + 1);
    for (Eigen::Index r = 0; r < K; ++r)
      for (Eigen::Index c = 0; c <= p; ++c) m.A(r, c) = a[static_cast<std::size_t>(r * (p + 1) + c)];
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed model document: ") + e.what());
  } catch (const TaxonomyError& e) {
    throw ModelFormatError(std::string("model taxonomy is invalid: ") + e.what());
  }
}

}  // namespace hierle
