#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jss/features.hpp"
#include "jss/instance.hpp"

namespace jss::ml {

enum class Head { Regression, Classification };

std::string to_string(Head head);

// Where a row came from: (job_b, op_b) is (-1, -1) for regression rows and
// the second operation of the pair for classification rows.
struct RowProvenance {
  int instance_id = 0;
  int job_a = 0;
  int op_a = 0;
  int job_b = -1;
  int op_b = -1;
};

struct Dataset {
  Head mode = Head::Regression;
  int dim = kFeatureCount;
  std::vector<double> features;  // row-major, rows() x dim
  std::vector<double> labels;
  std::vector<RowProvenance> provenance;

  int rows() const { return static_cast<int>(labels.size()); }
  std::span<const double> row(int r) const {
    return {features.data() + static_cast<std::size_t>(r) * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  void add_row(std::span<const double> x, double y, RowProvenance prov);
};

struct SolvedInstance {
  JssInstance instance;
  Schedule optimum;
  int id = 0;
};

// One row per operation: normalized features, label = normalized optimal
// start time.
Dataset build_regression_dataset(std::span<const SolvedInstance> solved);

// One row per ordered pair of operations sharing a machine: features are
// the difference of the normalized vectors, label -1 when the first
// operation starts earlier in the optimum (start ties broken by job then
// op index). Both orientations are emitted.
Dataset build_classification_dataset(std::span<const SolvedInstance> solved);

void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset_csv(const std::filesystem::path& path, Head mode);

}  // namespace jss::ml
