#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "jss/ml/dataset.hpp"
#include "jss/ml/gp.hpp"

namespace jss::ml {

enum class LearnerKind { LinearSvm, Mlp, Gp };

std::string to_string(LearnerKind kind);
std::optional<LearnerKind> learner_from_string(std::string_view token);

// w . x + b
struct LinearModel {
  std::vector<double> w;
  double bias = 0;

  double eval(std::span<const double> x) const;
};

// One hidden ReLU layer, linear output. Parameters are stored flat as
// [W1 (hidden x in, row-major), b1, W2, b2] so the whole vector can be
// gradient-checked.
struct MlpModel {
  int in = 0;
  int hidden = 0;
  std::vector<double> params;

  double eval(std::span<const double> x) const;
  std::size_t param_count() const {
    return static_cast<std::size_t>(hidden) * static_cast<std::size_t>(in) + 2 * static_cast<std::size_t>(hidden) + 1;
  }
};

struct GpModel {
  int in = 0;
  GpExpr expr;

  double eval(std::span<const double> x) const { return expr.eval(x); }
};

struct LearnerSpec {
  LearnerKind kind = LearnerKind::LinearSvm;
  Head head = Head::Regression;
  std::string objective_tag = "none";
  std::uint64_t seed = 1;

  // linear SVM: L2-regularized hinge (classification) or eps=0 insensitive
  // loss (regression), C fixed, deterministic full-batch subgradient
  // descent with averaged iterates.
  double svm_c = 1.0;
  int svm_epochs = 2000;
  double svm_eta0 = 1.0;

  // MLP: Adam on squared loss (regression) or logistic loss over +-1
  // labels (classification); convergence stop after `mlp_patience` epochs
  // without `mlp_tol` improvement.
  int mlp_hidden = 100;
  int mlp_epochs = 200;
  double mlp_learning_rate = 1e-3;
  int mlp_batch = 200;
  double mlp_tol = 1e-4;
  int mlp_patience = 10;

  // GP: MSE fitness for regression, mean hinge on the expression value for
  // classification.
  int gp_population = 500;
  int gp_generations = 50;
  int gp_tournament = 7;
  double gp_crossover = 0.9;
  double gp_mutation = 0.05;
  int gp_init_depth_min = 2;
  int gp_init_depth_max = 6;
  int gp_max_depth = 17;
};

class TrainedModel {
 public:
  TrainedModel(LearnerKind kind, Head head, std::string objective_tag,
               std::variant<LinearModel, MlpModel, GpModel> impl);

  LearnerKind learner() const { return kind_; }
  Head head() const { return head_; }
  const std::string& objective_tag() const { return objective_tag_; }
  int input_dim() const;

  // Raw score: predicted (normalized) start time for regression heads,
  // decision value for classification heads (positive = class +1).
  double evaluate(std::span<const double> x) const;

  const std::variant<LinearModel, MlpModel, GpModel>& impl() const { return impl_; }

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static TrainedModel load(std::istream& in);
  static TrainedModel load(const std::filesystem::path& path);

 private:
  LearnerKind kind_;
  Head head_;
  std::string objective_tag_;
  std::variant<LinearModel, MlpModel, GpModel> impl_;
};

TrainedModel train(const LearnerSpec& spec, const Dataset& dataset);

struct CvReport {
  Head head = Head::Regression;
  std::vector<double> fold_scores;  // accuracy or R^2 per fold
  double mean = 0;
  std::uint64_t seed = 0;
};

// Deterministic k-fold: rows shuffled by seed, split into k contiguous
// folds, each held out once.
CvReport cross_validate(const LearnerSpec& spec, const Dataset& dataset, int k = 5,
                        std::uint64_t seed = 1);

// Held-out metrics used by cross_validate, exposed for direct use.
double accuracy(const TrainedModel& model, const Dataset& dataset, std::span<const int> rows);
double r_squared(const TrainedModel& model, const Dataset& dataset, std::span<const int> rows);

// Internal trainers, exposed for tests.
LinearModel train_linear(const LearnerSpec& spec, const Dataset& dataset,
                         std::span<const int> rows);
MlpModel train_mlp(const LearnerSpec& spec, const Dataset& dataset, std::span<const int> rows);
GpModel train_gp(const LearnerSpec& spec, const Dataset& dataset, std::span<const int> rows);

// Loss and gradient of the MLP objective on a row subset; used by training
// and by the finite-difference gradient check.
double mlp_loss_and_grad(const MlpModel& model, Head head, const Dataset& dataset,
                         std::span<const int> rows, std::span<double> grad);

}  // namespace jss::ml
