#include <cmath>
#include <numeric>
#include <stdexcept>

#include "jss/ml/model.hpp"

namespace jss::ml {

double LinearModel::eval(std::span<const double> x) const {
  if (x.size() != w.size()) throw std::invalid_argument("feature dimension mismatch");
  double s = bias;
  for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * x[k];
  return s;
}

// Deterministic full-batch subgradient descent on
//   lambda/2 ||w||^2 + mean_i loss_i,   lambda = 1 / (C * n),
// with eta_t = eta0 / sqrt(t+1) and iterate averaging over the second half
// of the run. The bias is not regularized.
LinearModel train_linear(const LearnerSpec& spec, const Dataset& dataset,
                         std::span<const int> rows) {
  const int dim = dataset.dim;
  const std::size_t n = rows.size();
  if (n == 0) throw std::invalid_argument("empty dataset");

  const double lambda = 1.0 / (spec.svm_c * static_cast<double>(n));
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool classify = spec.head == Head::Classification;

  std::vector<double> w(static_cast<std::size_t>(dim), 0.0);
  double b = 0.0;
  std::vector<double> g(static_cast<std::size_t>(dim), 0.0);
  std::vector<double> w_avg(static_cast<std::size_t>(dim), 0.0);
  double b_avg = 0.0;
  long long avg_count = 0;
  const int avg_from = spec.svm_epochs / 2;

  for (int epoch = 0; epoch < spec.svm_epochs; ++epoch) {
    for (int k = 0; k < dim; ++k) g[static_cast<std::size_t>(k)] = lambda * w[static_cast<std::size_t>(k)];
    double gb = 0.0;

    for (int r : rows) {
      const auto x = dataset.row(r);
      const double y = dataset.labels[static_cast<std::size_t>(r)];
      double pred = b;
      for (int k = 0; k < dim; ++k) pred += w[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(k)];

      if (classify) {
        if (y * pred < 1.0) {
          const double c = -y * inv_n;
          for (int k = 0; k < dim; ++k) g[static_cast<std::size_t>(k)] += c * x[static_cast<std::size_t>(k)];
          gb += c;
        }
      } else {
        const double resid = pred - y;
        if (resid != 0.0) {
          const double c = (resid > 0 ? 1.0 : -1.0) * inv_n;
          for (int k = 0; k < dim; ++k) g[static_cast<std::size_t>(k)] += c * x[static_cast<std::size_t>(k)];
          gb += c;
        }
      }
    }

    const double eta = spec.svm_eta0 / std::sqrt(static_cast<double>(epoch) + 1.0);
    for (int k = 0; k < dim; ++k) w[static_cast<std::size_t>(k)] -= eta * g[static_cast<std::size_t>(k)];
    b -= eta * gb;

    if (epoch >= avg_from) {
      for (int k = 0; k < dim; ++k) w_avg[static_cast<std::size_t>(k)] += w[static_cast<std::size_t>(k)];
      b_avg += b;
      ++avg_count;
    }
  }

  LinearModel model;
  model.w.resize(static_cast<std::size_t>(dim));
  if (avg_count > 0) {
    for (int k = 0; k < dim; ++k)
      model.w[static_cast<std::size_t>(k)] = w_avg[static_cast<std::size_t>(k)] / static_cast<double>(avg_count);
    model.bias = b_avg / static_cast<double>(avg_count);
  } else {
    model.w = w;
    model.bias = b;
  }
  return model;
}

}  // namespace jss::ml
