#include "jss/ml/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "jss/error.hpp"
#include "jss/util/rng.hpp"

namespace jss::ml {

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::LinearSvm: return "svm";
    case LearnerKind::Mlp: return "mlp";
    case LearnerKind::Gp: return "gp";
  }
  return "?";
}

std::optional<LearnerKind> learner_from_string(std::string_view token) {
  if (token == "svm") return LearnerKind::LinearSvm;
  if (token == "mlp") return LearnerKind::Mlp;
  if (token == "gp") return LearnerKind::Gp;
  return std::nullopt;
}

TrainedModel::TrainedModel(LearnerKind kind, Head head, std::string objective_tag,
                           std::variant<LinearModel, MlpModel, GpModel> impl)
    : kind_(kind), head_(head), objective_tag_(std::move(objective_tag)), impl_(std::move(impl)) {}

int TrainedModel::input_dim() const {
  return std::visit(
      [](const auto& m) -> int {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>)
          return static_cast<int>(m.w.size());
        else
          return m.in;
      },
      impl_);
}

double TrainedModel::evaluate(std::span<const double> x) const {
  return std::visit([&](const auto& m) { return m.eval(x); }, impl_);
}

TrainedModel train(const LearnerSpec& spec, const Dataset& dataset) {
  if (dataset.rows() == 0) throw std::invalid_argument("empty dataset");
  if (spec.head != dataset.mode) throw std::invalid_argument("learner head does not match dataset mode");

  std::vector<int> rows(static_cast<std::size_t>(dataset.rows()));
  std::iota(rows.begin(), rows.end(), 0);

  switch (spec.kind) {
    case LearnerKind::LinearSvm:
      return TrainedModel(spec.kind, spec.head, spec.objective_tag, train_linear(spec, dataset, rows));
    case LearnerKind::Mlp:
      return TrainedModel(spec.kind, spec.head, spec.objective_tag, train_mlp(spec, dataset, rows));
    case LearnerKind::Gp:
      return TrainedModel(spec.kind, spec.head, spec.objective_tag, train_gp(spec, dataset, rows));
  }
  throw std::invalid_argument("unknown learner kind");
}

double accuracy(const TrainedModel& model, const Dataset& dataset, std::span<const int> rows) {
  if (rows.empty()) return 0.0;
  long long hits = 0;
  for (int r : rows) {
    const double pred = model.evaluate(dataset.row(r)) > 0 ? 1.0 : -1.0;
    if (pred == dataset.labels[static_cast<std::size_t>(r)]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double r_squared(const TrainedModel& model, const Dataset& dataset, std::span<const int> rows) {
  if (rows.empty()) return 0.0;
  double mean = 0;
  for (int r : rows) mean += dataset.labels[static_cast<std::size_t>(r)];
  mean /= static_cast<double>(rows.size());

  double ss_res = 0, ss_tot = 0;
  for (int r : rows) {
    const double y = dataset.labels[static_cast<std::size_t>(r)];
    const double pred = model.evaluate(dataset.row(r));
    ss_res += (pred - y) * (pred - y);
    ss_tot += (y - mean) * (y - mean);
  }
  if (ss_tot == 0) return 0.0;
  return 1.0 - ss_res / ss_tot;
}

CvReport cross_validate(const LearnerSpec& spec, const Dataset& dataset, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("cross validation needs k >= 2");
  if (dataset.rows() < k) throw std::invalid_argument("fewer rows than folds");
  if (spec.head != dataset.mode) throw std::invalid_argument("learner head does not match dataset mode");

  std::vector<int> order(static_cast<std::size_t>(dataset.rows()));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(splitmix64(seed ^ 0x63765ULL));
  rng.shuffle(order);

  CvReport report;
  report.head = spec.head;
  report.seed = seed;

  const std::size_t n = order.size();
  for (int fold = 0; fold < k; ++fold) {
    const std::size_t lo = n * static_cast<std::size_t>(fold) / static_cast<std::size_t>(k);
    const std::size_t hi = n * (static_cast<std::size_t>(fold) + 1) / static_cast<std::size_t>(k);

    std::vector<int> train_rows;
    train_rows.reserve(n - (hi - lo));
    train_rows.insert(train_rows.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(lo));
    train_rows.insert(train_rows.end(), order.begin() + static_cast<std::ptrdiff_t>(hi), order.end());
    std::span<const int> test_rows(order.data() + lo, hi - lo);

    LearnerSpec fold_spec = spec;
    fold_spec.seed = splitmix64(seed + static_cast<std::uint64_t>(fold) + 1);

    TrainedModel model = [&] {
      switch (fold_spec.kind) {
        case LearnerKind::LinearSvm:
          return TrainedModel(fold_spec.kind, fold_spec.head, fold_spec.objective_tag,
                              train_linear(fold_spec, dataset, train_rows));
        case LearnerKind::Mlp:
          return TrainedModel(fold_spec.kind, fold_spec.head, fold_spec.objective_tag,
                              train_mlp(fold_spec, dataset, train_rows));
        default:
          return TrainedModel(fold_spec.kind, fold_spec.head, fold_spec.objective_tag,
                              train_gp(fold_spec, dataset, train_rows));
      }
    }();

    report.fold_scores.push_back(spec.head == Head::Classification
                                     ? accuracy(model, dataset, test_rows)
                                     : r_squared(model, dataset, test_rows));
  }
  report.mean = std::accumulate(report.fold_scores.begin(), report.fold_scores.end(), 0.0) /
                static_cast<double>(report.fold_scores.size());
  return report;
}

namespace {

const char* kFormatTag = "modelfmt-v1";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double read_double(std::istream& in, const char* what) {
  std::string tok;
  if (!(in >> tok)) throw FormatError(std::string("missing value for ") + what);
  try {
    std::size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw FormatError(std::string("bad numeric value for ") + what + ": '" + tok + "'");
  }
}

int read_positive_int(std::istream& in, const char* what) {
  long long v = static_cast<long long>(read_double(in, what));
  if (v < 1 || v > (1 << 24)) throw FormatError(std::string("bad value for ") + what);
  return static_cast<int>(v);
}

void expect_key(std::istream& in, const char* key) {
  std::string tok;
  if (!(in >> tok) || tok != key)
    throw FormatError("expected '" + std::string(key) + "' in model file, got '" + tok + "'");
}

}  // namespace

void TrainedModel::save(std::ostream& out) const {
  out << kFormatTag << ' ' << to_string(kind_) << ' ' << to_string(head_) << ' ' << objective_tag_
      << '\n';
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          out << "dim " << m.w.size() << '\n';
          out << "bias " << fmt(m.bias) << '\n';
          out << "weights";
          for (double v : m.w) out << ' ' << fmt(v);
          out << '\n';
        } else if constexpr (std::is_same_v<T, MlpModel>) {
          out << "dim " << m.in << '\n';
          out << "hidden " << m.hidden << '\n';
          out << "params";
          for (double v : m.params) out << ' ' << fmt(v);
          out << '\n';
        } else {
          out << "dim " << m.in << '\n';
          out << "expr " << m.expr.to_prefix_string() << '\n';
        }
      },
      impl_);
}

void TrainedModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save(out);
}

TrainedModel TrainedModel::load(std::istream& in) {
  std::string version, learner_tok, head_tok, objective_tag;
  if (!(in >> version >> learner_tok >> head_tok >> objective_tag))
    throw FormatError("truncated model header");
  if (version != kFormatTag) throw FormatError("unsupported model format version: " + version);

  const auto learner = learner_from_string(learner_tok);
  if (!learner) throw FormatError("unknown learner: " + learner_tok);
  Head head;
  if (head_tok == "regression") head = Head::Regression;
  else if (head_tok == "classification") head = Head::Classification;
  else throw FormatError("unknown head: " + head_tok);

  expect_key(in, "dim");
  const int dim = read_positive_int(in, "dim");

  switch (*learner) {
    case LearnerKind::LinearSvm: {
      expect_key(in, "bias");
      LinearModel m;
      m.bias = read_double(in, "bias");
      expect_key(in, "weights");
      m.w.resize(static_cast<std::size_t>(dim));
      for (int k = 0; k < dim; ++k) m.w[static_cast<std::size_t>(k)] = read_double(in, "weight");
      return TrainedModel(*learner, head, objective_tag, std::move(m));
    }
    case LearnerKind::Mlp: {
      expect_key(in, "hidden");
      MlpModel m;
      m.in = dim;
      m.hidden = read_positive_int(in, "hidden");
      expect_key(in, "params");
      m.params.resize(m.param_count());
      for (auto& v : m.params) v = read_double(in, "param");
      return TrainedModel(*learner, head, objective_tag, std::move(m));
    }
    case LearnerKind::Gp: {
      expect_key(in, "expr");
      std::string rest;
      std::getline(in, rest);
      GpModel m;
      m.in = dim;
      m.expr = GpExpr::from_prefix_string(rest, dim);
      return TrainedModel(*learner, head, objective_tag, std::move(m));
    }
  }
  throw FormatError("unknown learner");
}

TrainedModel TrainedModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return load(in);
}

}  // namespace jss::ml
