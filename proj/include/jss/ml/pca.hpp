#pragma once

#include <array>
#include <vector>

#include "jss/ml/dataset.hpp"

namespace jss::ml {

// Top-2 principal directions of the mean-centered data, unit norm and
// mutually orthogonal, ordered by decreasing explained variance.
struct Pca2 {
  std::vector<double> mean;
  std::array<std::vector<double>, 2> components;
  std::array<double, 2> eigenvalues{};

  std::array<double, 2> project(std::span<const double> x) const;
};

struct Pca2Result {
  Pca2 basis;
  Dataset projected;  // dim = 2, labels and provenance preserved
};

// Eigen-decomposition of the dim x dim covariance. Needs at least 3 rows
// and non-degenerate (rank >= 1) data.
Pca2Result pca2(const Dataset& dataset);

}  // namespace jss::ml
