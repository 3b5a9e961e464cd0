#pragma once

// Simulation protocol: generate, split train/validation/test 1:1:2, tune on
// the validation split by 0-1 loss, evaluate on the test split, aggregate
// over replications.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hierle/classifier.hpp"
#include "hierle/datagen.hpp"
#include "hierle/metrics.hpp"

namespace hierle {

/// {10^(i/10) : i = -20..20}.
inline std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = -20; i <= 20; ++i) g.push_back(std::pow(10.0, i / 10.0));
  return g;
}

inline std::vector<PathPair> pair_paths(const LinearModel& model, const LabeledDataset& data) {
  const auto pred = predict_all(model, data.X);
  std::vector<PathPair> pairs;
  pairs.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) pairs.push_back({path_of_leaf(model.space->tree, data.labels[i]), pred[i]});
  return pairs;
}

inline double validation_error(const LinearModel& model, const LabeledDataset& valid) {
  return zero_one_loss(pair_paths(model, valid));
}

struct Selection {
  LinearModel model;
  double parameter = 0.0;
  double validation_l01 = 0.0;
};

/// Fits one model per grid value and keeps the lowest validation 0-1 loss;
/// ties keep the smaller parameter.
template <class Fit>
Selection select_by_validation(std::span<const double> grid, const LabeledDataset& valid, Fit&& fit) {
  if (grid.empty()) throw std::invalid_argument("tuning grid is empty");
  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());
  std::optional<Selection> best;
  for (double g : sorted) {
    LinearModel m = fit(g);
    const double err = validation_error(m, valid);
    if (!best || err < best->validation_l01) best = Selection{std::move(m), g, err};
  }
  return std::move(*best);
}

enum class Method { lin, wl, hinge };

inline const char* method_name(Method m) {
  switch (m) {
    case Method::lin: return "HierLE_lin";
    case Method::wl: return "HierLE_wl";
    case Method::hinge: return "HierLE_hinge";
  }
  return "?";
}

struct ProtocolOptions {
  std::vector<double> gamma_grid = default_grid();
  std::vector<double> lambda_grid = default_grid();
  HingeOptions hinge;
};

struct Splits {
  LabeledDataset train, valid, test;
};

/// Contiguous 1:1:2 split of an i.i.d. sample.
inline Splits split_1_1_2(const LabeledDataset& all) {
  const std::size_t n = all.size() / 4;
  if (n == 0) throw std::invalid_argument("need at least 4 samples to split 1:1:2");
  return {all.slice(0, n), all.slice(n, 2 * n), all.slice(2 * n, all.size())};
}

/// Trains `method` on the train split (tuning on valid) and evaluates on test.
/// Wall time covers training, validation and testing.
inline EvaluationReport run_method(Method method, const std::shared_ptr<const LabelSpace>& space, const Splits& s,
                                   const ProtocolOptions& opts, double* chosen = nullptr) {
  const auto start = std::chrono::steady_clock::now();
  LinearModel model;
  double param = 0.0;
  switch (method) {
    case Method::lin:
      model = train_linear(space, s.train);
      break;
    case Method::wl: {
      const LinearModel lin = train_linear(space, s.train);
      auto sel = select_by_validation(opts.gamma_grid, s.valid, [&](double g) { return train_weighted_linear(lin, s.train, g); });
      model = std::move(sel.model);
      param = sel.parameter;
      break;
    }
    case Method::hinge: {
      auto sel = select_by_validation(opts.lambda_grid, s.valid,
                                      [&](double l) { return train_hinge(space, s.train, l, opts.hinge).model; });
      model = std::move(sel.model);
      param = sel.parameter;
      break;
    }
  }
  EvaluationReport r = evaluate(pair_paths(model, s.test), space->tree);
  r.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (chosen) *chosen = param;
  return r;
}

struct Replication {
  std::uint64_t seed = 0;
  std::vector<EvaluationReport> reports;  // one per method, in request order
};

inline Replication run_replication(const SyntheticSpec& spec, std::span<const Method> methods, const ProtocolOptions& opts) {
  SyntheticData sd = generate(spec);
  const auto space = LabelSpace::make(std::move(sd.tree));
  const Splits s = split_1_1_2(sd.data);
  Replication rep;
  rep.seed = spec.seed;
  for (Method m : methods) rep.reports.push_back(run_method(m, space, s, opts));
  return rep;
}

struct MetricSummary {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

struct MethodSummary {
  Method method;
  MetricSummary l01, l_delta, l_h_sib, l_h_sub, hF, time;
};

inline MetricSummary summarize(const std::vector<double>& v) {
  MetricSummary s;
  if (v.empty()) return s;
  for (double x : v) s.mean += x;
  s.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return s;
}

struct BenchmarkResult {
  SyntheticSpec spec;
  std::size_t replications = 0;
  std::vector<Method> methods;
  std::vector<Replication> runs;
  std::vector<MethodSummary> summary;
};

/// Replication r uses derive_seed(master, r); runs are sequential.
inline BenchmarkResult run_benchmark(SyntheticSpec spec, std::size_t reps, std::uint64_t master_seed, std::vector<Method> methods,
                                     const ProtocolOptions& opts = {}) {
  BenchmarkResult out;
  out.spec = spec;
  out.spec.seed = master_seed;
  out.replications = reps;
  out.methods = methods;
  for (std::size_t r = 0; r < reps; ++r) {
    spec.seed = derive_seed(master_seed, r);
    out.runs.push_back(run_replication(spec, methods, opts));
  }
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    std::vector<double> l01, ld, ls, lu, hf, t;
    for (const auto& run : out.runs) {
      const auto& r = run.reports[mi];
      l01.push_back(r.l01);
      ld.push_back(r.l_delta);
      ls.push_back(r.l_h_sib);
      lu.push_back(r.l_h_sub);
      hf.push_back(r.hF);
      t.push_back(r.wall_time_seconds);
    }
    out.summary.push_back({methods[mi], summarize(l01), summarize(ld), summarize(ls), summarize(lu), summarize(hf), summarize(t)});
  }
  return out;
}

/// CSV: method, then mean and standard error of each metric. Timing columns
/// only when requested, so default output is reproducible byte for byte.
inline std::string benchmark_to_csv(const BenchmarkResult& b, bool with_time) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "method,reps,l01_mean,l01_se,l_delta_mean,l_delta_se,l_h_sib_mean,l_h_sib_se,l_h_sub_mean,l_h_sub_se,hF_mean,hF_se";
  if (with_time) os << ",time_mean,time_se";
  os << '\n';
  for (const auto& s : b.summary) {
    os << method_name(s.method) << ',' << b.replications;
    for (const auto* m : {&s.l01, &s.l_delta, &s.l_h_sib, &s.l_h_sub, &s.hF}) os << ',' << m->mean << ',' << m->se;
    if (with_time) os << ',' << s.time.mean << ',' << s.time.se;
    os << '\n';
  }
  return os.str();
}

inline std::string benchmark_to_text(const BenchmarkResult& b, bool with_time) {
  std::ostringstream os;
  os << "example " << b.spec.example;
  if (b.spec.example == 1) os << "  k=" << b.spec.k << "  p=" << b.spec.p;
  os << "  n_total=" << b.spec.n_total << "  reps=" << b.replications << "  seed=" << b.spec.seed << '\n';
  os << std::left << std::setw(14) << "method";
  for (const char* h : {"l01", "l_delta", "l_h_sib", "l_h_sub", "hF"}) os << std::setw(18) << h;
  if (with_time) os << std::setw(18) << "time(s)";
  os << '\n';
  auto cell = [&](const MetricSummary& m) {
    std::ostringstream c;
    c << std::fixed << std::setprecision(3) << m.mean << " (" << m.se << ")";
    os << std::setw(18) << c.str();
  };
  for (const auto& s : b.summary) {
    os << std::setw(14) << method_name(s.method);
    for (const auto* m : {&s.l01, &s.l_delta, &s.l_h_sib, &s.l_h_sub, &s.hF}) cell(*m);
    if (with_time) cell(s.time);
    os << '\n';
  }
  return os.str();
}

}  // namespace hierle
