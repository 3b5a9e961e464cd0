// hierle: command-line front end for embedding, training, prediction,
// evaluation, simulation and benchmarking.
//
// Exit codes: 0 success, 2 invalid input (unreadable file, malformed
// taxonomy, data or model, bad option values), 1 anything else.

#include <CLI11.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "hierle/hierle.hpp"

namespace {

using namespace hierle;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << content;
  if (!out) throw InputError("error writing '" + path + "'");
}

/// Writes to `path`, or to stdout when the path is empty.
void emit(const std::string& path, const std::string& content) {
  if (path.empty()) std::cout << content;
  else write_file(path, content);
}

Tree load_tree(const std::string& path) {
  try {
    return parse_tree(read_file(path));
  } catch (const TaxonomyError& e) {
    throw InputError(path + ": " + e.what());
  }
}

LabeledDataset load_data(const std::string& path, const Tree& tree, bool require_labels) {
  std::istringstream in(read_file(path));
  try {
    return read_dataset_csv(in, tree, require_labels);
  } catch (const DataError& e) {
    throw InputError(path + ": " + e.what());
  }
}

LinearModel load_model(const std::string& path) {
  try {
    return model_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path + ": not valid JSON: " + e.what());
  } catch (const ModelFormatError& e) {
    throw InputError(path + ": " + e.what());
  }
}

/// "default" or a comma-separated list of positive numbers.
std::vector<double> parse_grid(const std::string& text, const char* what) {
  if (text.empty() || text == "default") return default_grid();
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    const auto t = detail::trim(tok);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !(v > 0.0) || !std::isfinite(v))
      throw InputError(std::string(what) + ": '" + std::string(t) + "' is not a positive number");
    out.push_back(v);
  }
  if (out.empty()) throw InputError(std::string(what) + " is empty");
  return out;
}

std::string format_number(double v) { return detail::format_double(v); }

// --- embed ----------------------------------------------------------------

struct EmbedArgs {
  std::string tree, out, format = "csv", certificate;
  double t1 = 1.0, delta = kDefaultDelta;
};

int cmd_embed(const EmbedArgs& a) {
  const Tree tree = load_tree(a.tree);
  const EmbeddingTable table = embed_tree(tree, a.t1, a.delta);
  const WeightSchedule sched = build_schedule(tree, 1.0, a.delta);
  const double iso = verify_isometry(tree, sched, table);
  const HsReport hs_tree = check_hs(tree, sched);
  const HsReport hs_embedded = embedded_hs_check(tree, table);

  std::string body;
  if (a.format == "csv") body = embedding_to_csv(tree, table);
  else if (a.format == "text") body = embedding_to_text(tree, table);
  else body = embedding_to_json(tree, table).dump(2) + "\n";
  emit(a.out, body);

  nlohmann::ordered_json cert;
  cert["tree_hash"] = tree.hash();
  cert["T1"] = a.t1;
  cert["delta"] = a.delta;
  cert["K"] = table.dimension();
  cert["leaves"] = tree.leaf_count();
  cert["max_isometry_error"] = iso;
  cert["delta_certifies_hs"] = sched.certifiable();
  auto hs_json = [&](const HsReport& r) {
    nlohmann::ordered_json j;
    j["pairs_checked"] = r.pairs_checked;
    j["violations"] = r.violations.size();
    std::vector<std::string> first;
    for (std::size_t i = 0; i < r.violations.size() && i < 10; ++i) first.push_back(r.violations[i].describe(tree));
    j["examples"] = first;
    return j;
  };
  cert["hs_tree"] = hs_json(hs_tree);
  cert["hs_embedded"] = hs_json(hs_embedded);
  const std::string cert_path = !a.certificate.empty() ? a.certificate : (a.out.empty() ? "" : a.out + ".certificate.json");
  if (cert_path.empty()) std::cerr << cert.dump(2) << '\n';
  else write_file(cert_path, cert.dump(2) + "\n");
  return 0;
}

// --- train ----------------------------------------------------------------

struct TrainArgs {
  std::string tree, data, valid, model, loss = "linear", gamma_grid = "default", lambda_grid = "default";
  double t1 = 1.0, delta = kDefaultDelta;
  int max_iter = 5000;
};

int cmd_train(const TrainArgs& a) {
  const auto start = std::chrono::steady_clock::now();
  Tree tree = load_tree(a.tree);
  const LabeledDataset data = load_data(a.data, tree, true);
  const auto space = LabelSpace::make(std::move(tree), a.t1, a.delta);
  const LossKind loss = parse_loss(a.loss);
  HingeOptions hopts;
  hopts.max_iterations = a.max_iter;

  LinearModel model;
  std::ostringstream summary;
  summary << "loss: " << to_string(loss) << '\n';
  if (loss == LossKind::linear) {
    model = train_linear(space, data);
  } else {
    const auto grid = loss == LossKind::weighted_linear ? parse_grid(a.gamma_grid, "gamma grid") : parse_grid(a.lambda_grid, "lambda grid");
    auto fit = [&](const LabeledDataset& train, double v) {
      return loss == LossKind::weighted_linear ? train_weighted_linear(space, train, v) : train_hinge(space, train, v, hopts).model;
    };
    double chosen = grid.front();
    if (grid.size() == 1) {
      model = fit(data, chosen);
      summary << "tuning: none (single grid value)\n";
    } else if (!a.valid.empty()) {
      const LabeledDataset valid = load_data(a.valid, space->tree, true);
      auto sel = select_by_validation(grid, valid, [&](double v) { return fit(data, v); });
      chosen = sel.parameter;
      model = std::move(sel.model);
      summary << "tuning: " << grid.size() << " values on " << a.valid << ", validation l01 " << sel.validation_l01 << '\n';
    } else {
      if (data.size() < 2) throw InputError("need at least 2 samples to tune without --valid");
      const std::size_t half = data.size() / 2;
      const auto train = data.slice(0, half), valid = data.slice(half, data.size());
      auto sel = select_by_validation(grid, valid, [&](double v) { return fit(train, v); });
      chosen = sel.parameter;
      model = fit(data, chosen);
      summary << "tuning: " << grid.size() << " values on a 1:1 split, validation l01 " << sel.validation_l01
              << "; refit on all samples\n";
    }
    summary << (loss == LossKind::weighted_linear ? "gamma: " : "lambda: ") << format_number(chosen) << '\n';
  }
  if (!a.model.empty()) write_file(a.model, model_to_json(model).dump(2) + "\n");
  else std::cout << model_to_json(model).dump(2) << '\n';
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  summary << "samples: " << data.size() << "  features: " << data.features() << "  K: " << space->dimension() << '\n';
  summary << "wall_time_seconds: " << secs << '\n';
  (a.model.empty() ? std::cerr : std::cout) << summary.str();
  return 0;
}

// --- predict --------------------------------------------------------------

struct PredictArgs {
  std::string model, data, out;
};

int cmd_predict(const PredictArgs& a) {
  const LinearModel model = load_model(a.model);
  const LabeledDataset data = load_data(a.data, model.space->tree, false);
  if (data.features() != model.features())
    throw InputError(a.data + ": " + std::to_string(data.features()) + " features, model expects " + std::to_string(model.features()));
  const auto paths = predict_all(model, data.X);
  std::string out = "index,path\n";
  for (std::size_t i = 0; i < paths.size(); ++i) out += std::to_string(i) + "," + format_path(model.space->tree, paths[i]) + "\n";
  emit(a.out, out);
  return 0;
}

// --- evaluate -------------------------------------------------------------

/// Reads `index,path` rows, or a dataset CSV with a `label` column.
std::vector<Path> load_paths(const std::string& path, const Tree& tree) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || detail::trim(header).empty()) throw InputError(path + ": empty file");
  const auto cols = detail::split_csv_line(header);
  std::vector<Path> out;
  if (cols.size() == 2 && detail::trim(cols[0]) == "index" && detail::trim(cols[1]) == "path") {
    std::size_t line_no = 1;
    for (std::string line; std::getline(in, line);) {
      ++line_no;
      if (detail::trim(line).empty()) continue;
      const auto cells = detail::split_csv_line(line);
      if (cells.size() != 2) throw InputError(path + ": line " + std::to_string(line_no) + ": expected 'index,path'");
      if (detail::trim(cells[0]) != std::to_string(out.size()))
        throw InputError(path + ": line " + std::to_string(line_no) + ": expected index " + std::to_string(out.size()));
      try {
        out.push_back(parse_path(tree, cells[1]));
      } catch (const TaxonomyError& e) {
        throw InputError(path + ": line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  } else {
    for (NodeIndex leaf : load_data(path, tree, true).labels) out.push_back(path_of_leaf(tree, leaf));
  }
  if (out.empty()) throw InputError(path + ": no samples");
  return out;
}

struct EvaluateArgs {
  std::string tree, predictions, truth, out, format = "json";
};

int cmd_evaluate(const EvaluateArgs& a) {
  const Tree tree = load_tree(a.tree);
  const auto pred = load_paths(a.predictions, tree);
  const auto truth = load_paths(a.truth, tree);
  if (pred.size() != truth.size())
    throw InputError("predictions have " + std::to_string(pred.size()) + " rows but truth has " + std::to_string(truth.size()));
  std::vector<PathPair> pairs;
  for (std::size_t i = 0; i < pred.size(); ++i) pairs.push_back({truth[i], pred[i]});
  const auto report = evaluate(pairs, tree);
  emit(a.out, a.format == "text" ? report_to_text(report) : report_to_json(report).dump(2) + "\n");
  return 0;
}

// --- simulate / benchmark ---------------------------------------------------

struct SimArgs {
  int example = 1, k = 3;
  std::size_t p = 15, n = 0;
  double noise = 0.2, variance = 0.1;
  std::uint64_t seed = 1;
  std::string out, tree_out;
};

SyntheticSpec make_spec(const SimArgs& a) {
  SyntheticSpec s;
  s.example = a.example;
  s.k = a.k;
  s.p = a.p;
  s.n_total = a.n ? a.n : (a.example == 2 ? 8000 : 200);
  s.noise_rate = a.noise;
  s.variance = a.variance;
  s.seed = a.seed;
  return s;
}

int cmd_simulate(const SimArgs& a) {
  const SyntheticData sd = generate(make_spec(a));
  emit(a.out, dataset_to_csv(sd.tree, sd.data));
  const std::string tree_path = !a.tree_out.empty() ? a.tree_out : (a.out.empty() ? "" : a.out + ".tax");
  if (!tree_path.empty()) write_file(tree_path, sd.tree.to_document());
  return 0;
}

struct BenchArgs {
  SimArgs sim;
  std::size_t reps = 100;
  std::string methods, format = "text", out, gamma_grid = "default", lambda_grid = "default";
  bool timing = false;
  int max_iter = 5000;
};

int cmd_benchmark(const BenchArgs& a) {
  const SyntheticSpec spec = make_spec(a.sim);
  std::vector<Method> methods;
  const std::string list = a.methods.empty() ? (spec.example == 2 ? "lin,wl" : "lin,wl,hinge") : a.methods;
  std::stringstream ss(list);
  for (std::string tok; std::getline(ss, tok, ',');) {
    const auto t = detail::trim(tok);
    if (t == "lin" || t == "linear") methods.push_back(Method::lin);
    else if (t == "wl" || t == "wlinear") methods.push_back(Method::wl);
    else if (t == "hinge") methods.push_back(Method::hinge);
    else throw InputError("unknown method '" + std::string(t) + "' (expected lin, wl or hinge)");
  }
  if (a.reps == 0) throw InputError("--reps must be positive");
  ProtocolOptions opts;
  opts.gamma_grid = parse_grid(a.gamma_grid, "gamma grid");
  opts.lambda_grid = parse_grid(a.lambda_grid, "lambda grid");
  opts.hinge.max_iterations = a.max_iter;
  const auto result = run_benchmark(spec, a.reps, a.sim.seed, methods, opts);
  const std::string csv = benchmark_to_csv(result, a.timing);
  const std::string text = benchmark_to_text(result, a.timing);
  if (!a.out.empty()) {
    write_file(a.out, a.format == "text" ? text : csv);
    std::cout << text;
  } else {
    std::cout << (a.format == "csv" ? csv : text);
  }
  return 0;
}

template <class F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const InputError& e) {
    std::cerr << "hierle: error: " << e.what() << '\n';
    return 2;
  } catch (const TaxonomyError& e) {
    std::cerr << "hierle: error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "hierle: error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "hierle: error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "hierle: internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical classification with exact label embedding"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hierle 0.1.0");
  int rc = 0;

  EmbedArgs ea;
  auto* embed = app.add_subcommand("embed", "Embed a taxonomy and certify the isometry");
  embed->add_option("--tree", ea.tree, "Taxonomy document")->required();
  embed->add_option("--out", ea.out, "Output file (default: stdout)");
  embed->add_option("--format", ea.format, "csv, text or json")->check(CLI::IsMember({"csv", "text", "json"}));
  embed->add_option("--t1", ea.t1, "Norm of the second-layer points")->check(CLI::PositiveNumber);
  embed->add_option("--delta", ea.delta, "Layer decay ratio (> 1)");
  embed->add_option("--certificate", ea.certificate, "Certificate file (default: <out>.certificate.json, or stderr)");
  embed->callback([&] { rc = guarded([&] { return cmd_embed(ea); }); });

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Fit a linear model");
  train->add_option("--tree", ta.tree, "Taxonomy document")->required();
  train->add_option("--data", ta.data, "Training CSV (features and label)")->required();
  train->add_option("--valid", ta.valid, "Validation CSV used for tuning");
  train->add_option("--model", ta.model, "Model JSON to write (default: stdout)");
  train->add_option("--loss", ta.loss, "linear, wlinear or hinge")->check(CLI::IsMember({"linear", "wlinear", "hinge"}));
  train->add_option("--gamma-grid", ta.gamma_grid, "Comma-separated gamma values, or 'default'");
  train->add_option("--lambda-grid", ta.lambda_grid, "Comma-separated lambda values, or 'default'");
  train->add_option("--t1", ta.t1, "Embedding T1")->check(CLI::PositiveNumber);
  train->add_option("--delta", ta.delta, "Embedding delta");
  train->add_option("--max-iter", ta.max_iter, "Hinge solver iteration budget")->check(CLI::PositiveNumber);
  train->callback([&] { rc = guarded([&] { return cmd_train(ta); }); });

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "Predict root-to-leaf paths");
  predict->add_option("--model", pa.model, "Model JSON")->required();
  predict->add_option("--data", pa.data, "Feature CSV (a label column is ignored)")->required();
  predict->add_option("--out", pa.out, "Predictions CSV (default: stdout)");
  predict->callback([&] { rc = guarded([&] { return cmd_predict(pa); }); });

  EvaluateArgs va;
  auto* eval = app.add_subcommand("evaluate", "Score predictions against the truth");
  eval->add_option("--tree", va.tree, "Taxonomy document")->required();
  eval->add_option("--predictions", va.predictions, "Predictions CSV (index,path)")->required();
  eval->add_option("--truth,--data", va.truth, "Truth: dataset CSV with labels, or index,path CSV")->required();
  eval->add_option("--out", va.out, "Report file (default: stdout)");
  eval->add_option("--format", va.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  eval->callback([&] { rc = guarded([&] { return cmd_evaluate(va); }); });

  auto add_sim_options = [](CLI::App* sub, SimArgs& s) {
    sub->add_option("--example", s.example, "1 or 2")->check(CLI::IsMember({1, 2}));
    sub->add_option("--k", s.k, "Depth (example 1)");
    sub->add_option("--p", s.p, "Feature dimension (example 1)");
    sub->add_option("--n", s.n, "Total samples (default 200 for example 1, 8000 for example 2)");
    sub->add_option("--noise", s.noise, "Label noise rate (example 1)");
    sub->add_option("--variance", s.variance, "Feature noise variance");
    sub->add_option("--seed", s.seed, "Random seed");
  };

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  add_sim_options(sim, sa);
  sim->add_option("--out", sa.out, "Dataset CSV (default: stdout)");
  sim->add_option("--tree-out", sa.tree_out, "Taxonomy document (default: <out>.tax)");
  sim->callback([&] { rc = guarded([&] { return cmd_simulate(sa); }); });

  BenchArgs ba;
  auto* bench = app.add_subcommand("benchmark", "Run the simulation protocol");
  add_sim_options(bench, ba.sim);
  bench->add_option("--reps", ba.reps, "Replications");
  bench->add_option("--methods", ba.methods, "Comma-separated subset of lin,wl,hinge");
  bench->add_option("--format", ba.format, "csv or text")->check(CLI::IsMember({"csv", "text"}));
  bench->add_option("--out", ba.out, "Results file; the text table is also printed");
  bench->add_option("--gamma-grid", ba.gamma_grid, "Comma-separated gamma values, or 'default'");
  bench->add_option("--lambda-grid", ba.lambda_grid, "Comma-separated lambda values, or 'default'");
  bench->add_option("--max-iter", ba.max_iter, "Hinge solver iteration budget")->check(CLI::PositiveNumber);
  bench->add_flag("--timing", ba.timing, "Include wall-time columns");
  bench->callback([&] { rc = guarded([&] { return cmd_benchmark(ba); }); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
