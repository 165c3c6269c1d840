#include "drope/csv.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace drope {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    // trim whitespace and stray carriage returns
    const auto begin = cell.find_first_not_of(" \t\r");
    const auto end = cell.find_last_not_of(" \t\r");
    cells.push_back(begin == std::string::npos ? std::string() : cell.substr(begin, end - begin + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_feature(const std::string& cell, int row, const std::string& column) {
  if (cell.empty()) {
    throw std::runtime_error("csv: empty feature cell at row " + std::to_string(row) +
                             ", column '" + column + "'");
  }
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) {
    throw std::runtime_error("csv: non-numeric feature '" + cell + "' at row " +
                             std::to_string(row) + ", column '" + column + "'");
  }
  return v;
}

}  // namespace

ClassificationData load_classification_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open file: " + path);

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file: " + path);
  const std::vector<std::string> header = split_line(line);

  int label_index = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == label_column) {
      label_index = static_cast<int>(j);
      break;
    }
  }
  if (label_index < 0) {
    throw std::runtime_error("csv: label column '" + label_column + "' not found in " + path);
  }

  ClassificationData data;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<int>(j) != label_index) data.feature_names.push_back(header[j]);
  }
  const int d = static_cast<int>(data.feature_names.size());
  if (d == 0) throw std::runtime_error("csv: no feature columns in " + path);

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  int row_number = 1;
  while (std::getline(in, line)) {
    ++row_number;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("csv: row " + std::to_string(row_number) + " has " +
                               std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(header.size()));
    }
    std::vector<double> features;
    features.reserve(static_cast<std::size_t>(d));
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (static_cast<int>(j) == label_index) continue;
      features.push_back(parse_feature(cells[j], row_number, header[j]));
    }
    rows.push_back(std::move(features));
    raw_labels.push_back(cells[static_cast<std::size_t>(label_index)]);
  }
  if (rows.empty()) throw std::runtime_error("csv: no data rows in " + path);

  // dense label re-indexing, sorted by original label string
  std::map<std::string, int> label_ids;
  for (const std::string& s : raw_labels) label_ids.emplace(s, 0);
  if (label_ids.size() < 2) {
    throw std::runtime_error("csv: dataset has a single class; need at least 2");
  }
  int next = 0;
  for (auto& [name, id] : label_ids) {
    id = next++;
    data.class_names.push_back(name);
  }
  data.num_classes = next;

  data.contexts.resize(static_cast<Eigen::Index>(rows.size()), d);
  data.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (int j = 0; j < d; ++j) data.contexts(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    data.labels[i] = label_ids.at(raw_labels[i]);
  }
  return data;
}

void write_classification_csv(const std::string& path, const ClassificationData& data,
                              const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write file: " + path);
  const int d = static_cast<int>(data.contexts.cols());
  for (int j = 0; j < d; ++j) {
    const std::string name = j < static_cast<int>(data.feature_names.size())
                                 ? data.feature_names[static_cast<std::size_t>(j)]
                                 : "f" + std::to_string(j);
    out << name << ",";
  }
  out << label_column << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < data.contexts.rows(); ++i) {
    for (int j = 0; j < d; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", data.contexts(i, j));
      out << buf << ",";
    }
    const int label = data.labels[static_cast<std::size_t>(i)];
    if (label < static_cast<int>(data.class_names.size())) {
      out << data.class_names[static_cast<std::size_t>(label)];
    } else {
      out << label;
    }
    out << "\n";
  }
}

}  // namespace drope
