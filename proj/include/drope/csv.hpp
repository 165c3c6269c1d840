#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace drope {

/// A multiclass classification table: numeric features plus a dense label.
struct ClassificationData {
  Eigen::MatrixXd contexts;            // row per instance
  std::vector<int> labels;             // in [0, num_classes)
  int num_classes = 0;
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;  // original label strings, sorted
};

/// Loads a labeled CSV (header row required, comma-delimited). The label
/// column is selected by name; every other column must parse as a real
/// feature. Labels are re-indexed densely to [0, k) in sorted order of the
/// original label strings.
///
/// Throws std::runtime_error on a missing file or label column, a
/// non-numeric feature cell, or a single-class dataset.
ClassificationData load_classification_csv(const std::string& path, const std::string& label_column);

/// Writes the table back out in the format load_classification_csv reads.
void write_classification_csv(const std::string& path, const ClassificationData& data,
                              const std::string& label_column = "label");

}  // namespace drope
