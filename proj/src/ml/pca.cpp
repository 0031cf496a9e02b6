#include "jss/ml/pca.hpp"

#include <Eigen/Dense>
#include <stdexcept>

namespace jss::ml {

std::array<double, 2> Pca2::project(std::span<const double> x) const {
  if (x.size() != mean.size()) throw std::invalid_argument("feature dimension mismatch");
  std::array<double, 2> out{0.0, 0.0};
  for (std::size_t k = 0; k < mean.size(); ++k) {
    const double centered = x[k] - mean[k];
    out[0] += centered * components[0][k];
    out[1] += centered * components[1][k];
  }
  return out;
}

Pca2Result pca2(const Dataset& dataset) {
  const int n = dataset.rows();
  const int dim = dataset.dim;
  if (n < 3) throw std::invalid_argument("pca2 needs at least 3 rows");
  if (dim < 2) throw std::invalid_argument("pca2 needs at least 2 feature dimensions");

  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> X(
      dataset.features.data(), n, dim);

  Eigen::RowVectorXd mean = X.colwise().mean();
  Eigen::MatrixXd centered = X.rowwise() - mean;
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("eigen decomposition failed");

  // Eigenvalues come sorted ascending; the two largest are the last.
  const double top = solver.eigenvalues()(dim - 1);
  if (top <= 1e-12) throw std::invalid_argument("degenerate data: zero covariance");

  Pca2Result result;
  result.basis.mean.assign(mean.data(), mean.data() + dim);
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(dim - 1 - c);
    // Fix sign: the entry of largest magnitude is positive.
    int imax = 0;
    for (int k = 1; k < dim; ++k)
      if (std::abs(v(k)) > std::abs(v(imax))) imax = k;
    if (v(imax) < 0) v = -v;
    result.basis.components[static_cast<std::size_t>(c)].assign(v.data(), v.data() + dim);
    result.basis.eigenvalues[static_cast<std::size_t>(c)] = solver.eigenvalues()(dim - 1 - c);
  }

  result.projected.mode = dataset.mode;
  result.projected.dim = 2;
  result.projected.features.reserve(static_cast<std::size_t>(n) * 2);
  for (int r = 0; r < n; ++r) {
    const auto p = result.basis.project(dataset.row(r));
    result.projected.add_row(p, dataset.labels[static_cast<std::size_t>(r)],
                             dataset.provenance[static_cast<std::size_t>(r)]);
  }
  return result;
}

}  // namespace jss::ml
