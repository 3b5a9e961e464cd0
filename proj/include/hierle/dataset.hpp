#pragma once

// Labeled feature matrix and its CSV form: header `f1,...,fp,label`, one row
// per sample, label = leaf node id.

#include <Eigen/Dense>
#include <charconv>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hierle/embedding.hpp"
#include "hierle/tree.hpp"

namespace hierle {

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledDataset {
  Eigen::MatrixXd X;               // n x p, rows are samples
  std::vector<NodeIndex> labels;   // leaf per sample

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t features() const noexcept { return static_cast<std::size_t>(X.cols()); }

  /// Rows [begin, end) as a new dataset.
  LabeledDataset slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > size()) throw std::out_of_range("LabeledDataset::slice");
    LabeledDataset out;
    out.X = X.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
    out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(begin), labels.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
  }
};

inline void validate_dataset(const Tree& tree, const LabeledDataset& ds) {
  if (ds.size() == 0) throw DataError("dataset has no samples");
  if (static_cast<std::size_t>(ds.X.rows()) != ds.labels.size())
    throw DataError("feature rows (" + std::to_string(ds.X.rows()) + ") and labels (" + std::to_string(ds.labels.size()) + ") differ");
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] >= tree.size() || !tree.is_leaf(ds.labels[i]))
      throw DataError("sample " + std::to_string(i) + ": label is not a leaf of the taxonomy");
  }
  if (!ds.X.allFinite()) throw DataError("features contain NaN or infinite values");
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  for (;;) {
    auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw DataError("line " + std::to_string(line) + ": '" + std::string(s) + "' is not a number");
  if (!std::isfinite(v)) throw DataError("line " + std::to_string(line) + ": '" + std::string(s) + "' is not finite");
  return v;
}

}  // namespace detail

/// Reads a dataset CSV. A `label` column is required when `require_labels`.
inline LabeledDataset read_dataset_csv(std::istream& in, const Tree& tree, bool require_labels = true) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw DataError("empty data file");
  ++line_no;
  auto header = detail::split_csv_line(line);
  std::ptrdiff_t label_col = -1;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "label") label_col = static_cast<std::ptrdiff_t>(c);
    else feature_cols.push_back(c);
  }
  if (require_labels && label_col < 0) throw DataError("data file has no 'label' column");
  if (feature_cols.empty()) throw DataError("data file has no feature columns");

  std::vector<double> values;
  LabeledDataset ds;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields, got " + std::to_string(cells.size()));
    for (auto c : feature_cols) values.push_back(detail::parse_double(cells[c], line_no));
    if (label_col >= 0) {
      auto id = cells[static_cast<std::size_t>(label_col)];
      auto found = tree.find(id);
      if (!found) throw DataError("line " + std::to_string(line_no) + ": label '" + std::string(id) + "' is not in the taxonomy");
      if (!tree.is_leaf(*found)) throw DataError("line " + std::to_string(line_no) + ": label '" + std::string(id) + "' is not a leaf");
      ds.labels.push_back(*found);
    } else {
      ds.labels.push_back(tree.leaves().front());
    }
  }
  const auto n = static_cast<Eigen::Index>(ds.labels.size());
  const auto p = static_cast<Eigen::Index>(feature_cols.size());
  if (n == 0) throw DataError("data file has no samples");
  ds.X = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), n, p);
  return ds;
}

inline std::string dataset_to_csv(const Tree& tree, const LabeledDataset& ds) {
  std::string out;
  for (Eigen::Index j = 0; j < ds.X.cols(); ++j) out += "f" + std::to_string(j + 1) + ",";
  out += "label\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (Eigen::Index j = 0; j < ds.X.cols(); ++j) {
      out += detail::format_double(ds.X(static_cast<Eigen::Index>(i), j));
      out += ',';
    }
    out += tree.id(ds.labels[i]);
    out += '\n';
  }
  return out;
}

}  // namespace hierle
