#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "jss/ml/model.hpp"
#include "jss/util/rng.hpp"

namespace jss::ml {

namespace {

struct ParamView {
  double* w1;  // hidden x in
  double* b1;  // hidden
  double* w2;  // hidden
  double* b2;  // 1
};

ParamView view(int in, int hidden, double* p) {
  ParamView v;
  v.w1 = p;
  v.b1 = p + static_cast<std::size_t>(hidden) * static_cast<std::size_t>(in);
  v.w2 = v.b1 + hidden;
  v.b2 = v.w2 + hidden;
  return v;
}

inline double softplus(double t) {
  // log(1 + e^t), stable for large |t|
  return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

double MlpModel::eval(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != in) throw std::invalid_argument("feature dimension mismatch");
  const auto v = view(in, hidden, const_cast<double*>(params.data()));
  double out = *v.b2;
  for (int h = 0; h < hidden; ++h) {
    const double* row = v.w1 + static_cast<std::size_t>(h) * static_cast<std::size_t>(in);
    double z = v.b1[h];
    for (int k = 0; k < in; ++k) z += row[k] * x[static_cast<std::size_t>(k)];
    if (z > 0) out += v.w2[h] * z;
  }
  return out;
}

double mlp_loss_and_grad(const MlpModel& model, Head head, const Dataset& dataset,
                         std::span<const int> rows, std::span<double> grad) {
  const int in = model.in;
  const int hidden = model.hidden;
  if (grad.size() != model.param_count()) throw std::invalid_argument("gradient size mismatch");
  if (rows.empty()) throw std::invalid_argument("empty batch");

  const auto p = view(in, hidden, const_cast<double*>(model.params.data()));
  std::fill(grad.begin(), grad.end(), 0.0);
  auto g = view(in, hidden, grad.data());

  std::vector<double> z1(static_cast<std::size_t>(hidden));
  const double inv_b = 1.0 / static_cast<double>(rows.size());
  double loss = 0.0;

  for (int r : rows) {
    const auto x = dataset.row(r);
    const double y = dataset.labels[static_cast<std::size_t>(r)];

    double out = *p.b2;
    for (int h = 0; h < hidden; ++h) {
      const double* row = p.w1 + static_cast<std::size_t>(h) * static_cast<std::size_t>(in);
      double z = p.b1[h];
      for (int k = 0; k < in; ++k) z += row[k] * x[static_cast<std::size_t>(k)];
      z1[static_cast<std::size_t>(h)] = z;
      if (z > 0) out += p.w2[h] * z;
    }

    double dout;
    if (head == Head::Regression) {
      const double resid = out - y;
      loss += 0.5 * resid * resid;
      dout = resid;
    } else {
      loss += softplus(-y * out);
      dout = -y * sigmoid(-y * out);
    }
    dout *= inv_b;

    *g.b2 += dout;
    for (int h = 0; h < hidden; ++h) {
      const double z = z1[static_cast<std::size_t>(h)];
      if (z <= 0) continue;
      g.w2[h] += dout * z;
      const double dz = dout * p.w2[h];
      g.b1[h] += dz;
      double* grow = g.w1 + static_cast<std::size_t>(h) * static_cast<std::size_t>(in);
      for (int k = 0; k < in; ++k) grow[k] += dz * x[static_cast<std::size_t>(k)];
    }
  }
  return loss * inv_b;
}

MlpModel train_mlp(const LearnerSpec& spec, const Dataset& dataset, std::span<const int> rows) {
  if (rows.empty()) throw std::invalid_argument("empty dataset");

  MlpModel model;
  model.in = dataset.dim;
  model.hidden = spec.mlp_hidden;
  model.params.assign(model.param_count(), 0.0);

  Rng rng(splitmix64(spec.seed ^ 0x6d6c70ULL));
  {
    auto p = view(model.in, model.hidden, model.params.data());
    const double bound1 = std::sqrt(6.0 / (model.in + model.hidden));
    const double bound2 = std::sqrt(6.0 / (model.hidden + 1));
    for (int i = 0; i < model.hidden * model.in; ++i) p.w1[i] = rng.uniform_real(-bound1, bound1);
    for (int h = 0; h < model.hidden; ++h) p.w2[h] = rng.uniform_real(-bound2, bound2);
  }

  const std::size_t np = model.param_count();
  std::vector<double> grad(np), m1(np, 0.0), m2(np, 0.0);
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long step = 0;

  std::vector<int> order(rows.begin(), rows.end());
  const int batch = std::max(1, std::min<int>(spec.mlp_batch, static_cast<int>(order.size())));

  double best_loss = std::numeric_limits<double>::infinity();
  int no_improvement = 0;

  for (int epoch = 0; epoch < spec.mlp_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;

    for (std::size_t at = 0; at < order.size(); at += static_cast<std::size_t>(batch)) {
      const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(batch), order.size() - at);
      epoch_loss += mlp_loss_and_grad(model, spec.head, dataset,
                                      std::span<const int>(order.data() + at, take), grad);
      ++batches;

      ++step;
      const double corr = std::sqrt(1.0 - std::pow(beta2, static_cast<double>(step))) /
                          (1.0 - std::pow(beta1, static_cast<double>(step)));
      for (std::size_t i = 0; i < np; ++i) {
        m1[i] = beta1 * m1[i] + (1 - beta1) * grad[i];
        m2[i] = beta2 * m2[i] + (1 - beta2) * grad[i] * grad[i];
        model.params[i] -= spec.mlp_learning_rate * corr * m1[i] / (std::sqrt(m2[i]) + eps);
      }
    }

    epoch_loss /= std::max(1, batches);
    if (epoch_loss < best_loss - spec.mlp_tol) {
      best_loss = epoch_loss;
      no_improvement = 0;
    } else {
      best_loss = std::min(best_loss, epoch_loss);
      if (++no_improvement >= spec.mlp_patience) break;
    }
  }
  return model;
}

}  // namespace jss::ml
