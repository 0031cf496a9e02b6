#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jss/error.hpp"
#include "jss/experiment.hpp"
#include "jss/ml/pca.hpp"
#include "jss/ml/predict.hpp"

namespace fs = std::filesystem;
using namespace jss;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

std::pair<int, int> parse_size(const std::string& text) {
  const auto x = text.find('x');
  if (x == std::string::npos) throw std::invalid_argument("size must look like NxM: " + text);
  const int jobs = std::stoi(text.substr(0, x));
  const int machines = std::stoi(text.substr(x + 1));
  if (jobs < 1 || machines < 1) throw std::invalid_argument("size must be positive: " + text);
  return {jobs, machines};
}

Objective parse_objective(const std::string& text) {
  const auto obj = objective_from_string(text);
  if (!obj) throw std::invalid_argument("unknown objective: " + text);
  return *obj;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct ModelSet {
  std::optional<ml::TrainedModel> regression;
  std::optional<ml::TrainedModel> classification;
};

ModelSet load_models(const std::vector<std::string>& paths) {
  ModelSet set;
  for (const std::string& p : paths) {
    if (!fs::exists(p)) throw std::invalid_argument("model file not found: " + p);
    ml::TrainedModel model = ml::TrainedModel::load(fs::path(p));
    auto& slot = model.head() == ml::Head::Regression ? set.regression : set.classification;
    if (slot) throw std::invalid_argument("two models with the same head given: " + p);
    slot = std::move(model);
  }
  return set;
}

ml::LearnerSpec build_spec(const std::string& learner, const std::string& head,
                           const std::string& objective, std::uint64_t seed) {
  ml::LearnerSpec spec;
  const auto kind = ml::learner_from_string(learner);
  if (!kind) throw std::invalid_argument("unknown learner: " + learner);
  spec.kind = *kind;
  if (head == "regression") spec.head = ml::Head::Regression;
  else if (head == "classification") spec.head = ml::Head::Classification;
  else throw std::invalid_argument("head must be regression or classification");
  spec.objective_tag = objective;
  spec.seed = seed;
  return spec;
}

void print_cv(const ml::CvReport& report) {
  const char* metric = report.head == ml::Head::Classification ? "accuracy" : "r2";
  for (std::size_t f = 0; f < report.fold_scores.size(); ++f)
    std::printf("fold %zu %s: %.4f\n", f, metric, report.fold_scores[f]);
  std::printf("mean %s: %.4f\n", metric, report.mean);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constraint-programming job shop solver with learned variable ordering"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate random instances");
  std::string gen_size = "9x9";
  int gen_count = 1;
  std::uint64_t gen_seed = 1;
  double gen_h = 1.3;
  std::string gen_out, gen_format = "native";
  gen->add_option("--size", gen_size, "Instance size NxM");
  gen->add_option("--count", gen_count, "Number of instances");
  gen->add_option("--seed", gen_seed, "Base seed; instance k uses seed+k");
  gen->add_option("--allowance", gen_h, "Due date allowance factor h");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--format", gen_format, "native or orlib");

  // corpus
  auto* corpus = app.add_subcommand("corpus", "Solve a training corpus to optimality");
  std::string corpus_obj = "cmax", corpus_size = "9x9", corpus_out;
  int corpus_count = 100, corpus_attempts = 0, corpus_threads = default_worker_count();
  std::uint64_t corpus_seed = 1;
  double corpus_h = 1.3;
  long long corpus_budget = 20'000'000;
  corpus->add_option("--objective", corpus_obj, "cmax, tmax or twt");
  corpus->add_option("--size", corpus_size, "Instance size NxM");
  corpus->add_option("--count", corpus_count, "Solved instances to deliver");
  corpus->add_option("--seed", corpus_seed, "Base seed");
  corpus->add_option("--allowance", corpus_h, "Due date allowance factor h");
  corpus->add_option("--budget-branches", corpus_budget, "Per-instance proof budget");
  corpus->add_option("--max-attempts", corpus_attempts, "Attempt cap (default 2*count)");
  corpus->add_option("--threads", corpus_threads, "Worker pool size");
  corpus->add_option("--out", corpus_out, "Output directory")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset CSV");
  std::string train_data, train_head = "regression", train_learner = "svm",
              train_obj = "none", train_out, train_pca_points, train_pca_grid;
  std::uint64_t train_seed = 1;
  int train_pca_steps = 100;
  ml::LearnerSpec hyper;  // flag-surfaced hyperparameters
  train_cmd->add_option("--data", train_data, "Dataset CSV")->required();
  train_cmd->add_option("--head", train_head, "regression or classification");
  train_cmd->add_option("--learner", train_learner, "svm, mlp or gp");
  train_cmd->add_option("--objective", train_obj, "Objective tag stored in the model");
  train_cmd->add_option("--seed", train_seed, "Training seed");
  train_cmd->add_option("--out", train_out, "Model file to write")->required();
  train_cmd->add_option("--svm-epochs", hyper.svm_epochs, "Subgradient epochs");
  train_cmd->add_option("--svm-c", hyper.svm_c, "SVM C");
  train_cmd->add_option("--mlp-hidden", hyper.mlp_hidden, "Hidden units");
  train_cmd->add_option("--mlp-epochs", hyper.mlp_epochs, "Max epochs");
  train_cmd->add_option("--mlp-batch", hyper.mlp_batch, "Minibatch size");
  train_cmd->add_option("--gp-population", hyper.gp_population, "GP population");
  train_cmd->add_option("--gp-generations", hyper.gp_generations, "GP generations");
  train_cmd->add_option("--gp-tournament", hyper.gp_tournament, "GP tournament size");
  train_cmd->add_option("--pca-points", train_pca_points, "Write projected points CSV");
  train_cmd->add_option("--pca-grid", train_pca_grid, "Write 2-D decision grid CSV");
  train_cmd->add_option("--pca-steps", train_pca_steps, "Grid resolution");

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "Cross-validate a learner on a dataset CSV");
  std::string cv_data, cv_head = "regression", cv_learner = "svm", cv_obj = "none", cv_out;
  int cv_k = 5;
  std::uint64_t cv_seed = 1;
  ml::LearnerSpec cv_hyper;
  cv_cmd->add_option("--data", cv_data, "Dataset CSV")->required();
  cv_cmd->add_option("--head", cv_head, "regression or classification");
  cv_cmd->add_option("--learner", cv_learner, "svm, mlp or gp");
  cv_cmd->add_option("--objective", cv_obj, "Objective tag");
  cv_cmd->add_option("--k", cv_k, "Folds");
  cv_cmd->add_option("--seed", cv_seed, "Shuffle seed");
  cv_cmd->add_option("--out", cv_out, "Optional CSV to append the result");
  cv_cmd->add_option("--svm-epochs", cv_hyper.svm_epochs, "Subgradient epochs");
  cv_cmd->add_option("--mlp-hidden", cv_hyper.mlp_hidden, "Hidden units");
  cv_cmd->add_option("--mlp-epochs", cv_hyper.mlp_epochs, "Max epochs");
  cv_cmd->add_option("--gp-population", cv_hyper.gp_population, "GP population");
  cv_cmd->add_option("--gp-generations", cv_hyper.gp_generations, "GP generations");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance file");
  std::string solve_file, solve_obj = "cmax", solve_strategy = "lowmin";
  std::vector<std::string> solve_models;
  double solve_cutoff = 60.0;
  long long solve_branches = std::numeric_limits<long long>::max();
  long long solve_prove = 100'000'000;
  std::uint64_t solve_seed = 0;
  solve_cmd->add_option("--instance", solve_file, "Instance file (native or OR-library)")->required();
  solve_cmd->add_option("--objective", solve_obj, "cmax, tmax or twt");
  solve_cmd->add_option("--strategy", solve_strategy, "Strategy token");
  solve_cmd->add_option("--model", solve_models, "Model file (repeatable)");
  solve_cmd->add_option("--cutoff-secs", solve_cutoff, "Time limit");
  solve_cmd->add_option("--max-branches", solve_branches, "Branch limit");
  solve_cmd->add_option("--prove-max-branches", solve_prove, "Proof budget for optsol");
  solve_cmd->add_option("--seed", solve_seed, "Seed for the random strategy");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Compare strategies over generated instances");
  std::string exp_obj = "cmax", exp_out, exp_reference = "random";
  std::vector<std::string> exp_sizes, exp_strategies, exp_models;
  int exp_count = 25, exp_threads = default_worker_count();
  std::uint64_t exp_seed = 1;
  double exp_h = 1.3, exp_cutoff = 60.0;
  long long exp_branches = std::numeric_limits<long long>::max();
  long long exp_prove = 100'000'000;
  exp_cmd->add_option("--objective", exp_obj, "cmax, tmax or twt");
  exp_cmd->add_option("--size", exp_sizes, "Instance size NxM (repeatable)")->required();
  exp_cmd->add_option("--count", exp_count, "Instances per size");
  exp_cmd->add_option("--strategy", exp_strategies, "Strategy token (repeatable)")->required();
  exp_cmd->add_option("--model", exp_models, "Model file (repeatable)");
  exp_cmd->add_option("--cutoff-secs", exp_cutoff, "Per-solve time limit");
  exp_cmd->add_option("--max-branches", exp_branches, "Per-solve branch limit");
  exp_cmd->add_option("--prove-max-branches", exp_prove, "Proof budget for optsol strategies");
  exp_cmd->add_option("--seed", exp_seed, "Base instance seed");
  exp_cmd->add_option("--allowance", exp_h, "Due date allowance factor h");
  exp_cmd->add_option("--reference", exp_reference, "Improvement reference strategy");
  exp_cmd->add_option("--threads", exp_threads, "Worker pool size");
  exp_cmd->add_option("--out", exp_out, "Output directory")->required();

  // report
  auto* report_cmd = app.add_subcommand("report", "Aggregate a results.csv into a report.csv");
  std::string report_in, report_out, report_reference = "random";
  report_cmd->add_option("--results", report_in, "results.csv from an experiment")->required();
  report_cmd->add_option("--out", report_out, "report.csv to write")->required();
  report_cmd->add_option("--reference", report_reference, "Improvement reference strategy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      const auto [jobs, machines] = parse_size(gen_size);
      fs::create_directories(gen_out);
      for (int k = 0; k < gen_count; ++k) {
        const std::uint64_t seed = gen_seed + static_cast<std::uint64_t>(k);
        const JssInstance inst = generate(jobs, machines, gen_h, seed);
        char name[96];
        std::snprintf(name, sizeof name, "jss_%dx%d_s%llu.%s", jobs, machines,
                      static_cast<unsigned long long>(seed),
                      gen_format == "orlib" ? "txt" : "jss");
        std::ofstream out(fs::path(gen_out) / name);
        if (gen_format == "orlib") out << serialize_orlib(inst);
        else if (gen_format == "native") out << serialize_native(inst);
        else throw std::invalid_argument("format must be native or orlib");
        std::printf("%s\n", (fs::path(gen_out) / name).c_str());
      }
      return 0;
    }

    if (*corpus) {
      CorpusConfig config;
      std::tie(config.n_jobs, config.n_machines) = parse_size(corpus_size);
      config.objective = parse_objective(corpus_obj);
      config.count = corpus_count;
      config.seed = corpus_seed;
      config.h = corpus_h;
      config.budget_branches = corpus_budget;
      config.max_attempts = corpus_attempts;
      config.threads = corpus_threads;
      config.out_dir = corpus_out;
      const CorpusResult result = make_training_corpus(config);
      std::printf("solved %d/%d instances (%d attempted); data collection took %.2f minutes\n",
                  result.solved, result.requested, result.attempted,
                  result.collect_seconds / 60.0);
      if (result.solved < result.requested) {
        std::fprintf(stderr, "warning: %d instance(s) unproven within the branch budget\n",
                     result.attempted - result.solved);
        return kExitBudget;
      }
      return 0;
    }

    if (*train_cmd) {
      ml::LearnerSpec spec = hyper;
      const ml::LearnerSpec base = build_spec(train_learner, train_head, train_obj, train_seed);
      spec.kind = base.kind;
      spec.head = base.head;
      spec.objective_tag = base.objective_tag;
      spec.seed = base.seed;

      const ml::Dataset dataset = ml::read_dataset_csv(train_data, spec.head);
      const ml::TrainedModel model = ml::train(spec, dataset);
      model.save(fs::path(train_out));
      std::printf("trained %s %s on %d rows -> %s\n", train_learner.c_str(), train_head.c_str(),
                  dataset.rows(), train_out.c_str());
      if (const auto* gp = std::get_if<ml::GpModel>(&model.impl()))
        std::printf("learned expression: %s\n", gp->expr.to_prefix_string().c_str());

      if (!train_pca_grid.empty() || !train_pca_points.empty()) {
        if (train_pca_grid.empty() || train_pca_points.empty())
          throw std::invalid_argument("--pca-points and --pca-grid must be given together");
        const ml::Pca2Result projected = ml::pca2(dataset);
        ml::LearnerSpec spec2d = spec;
        spec2d.kind = ml::LearnerKind::Mlp;
        const ml::TrainedModel model2d = ml::train(spec2d, projected.projected);
        write_pca_boundary(model2d, projected.projected, train_pca_points, train_pca_grid,
                           train_pca_steps);
        std::printf("pca boundary -> %s, %s\n", train_pca_points.c_str(), train_pca_grid.c_str());
      }
      return 0;
    }

    if (*cv_cmd) {
      ml::LearnerSpec spec = cv_hyper;
      const ml::LearnerSpec base = build_spec(cv_learner, cv_head, cv_obj, cv_seed);
      spec.kind = base.kind;
      spec.head = base.head;
      spec.objective_tag = base.objective_tag;
      spec.seed = base.seed;

      const ml::Dataset dataset = ml::read_dataset_csv(cv_data, spec.head);
      const ml::CvReport report = ml::cross_validate(spec, dataset, cv_k, cv_seed);
      print_cv(report);
      if (!cv_out.empty()) {
        const bool fresh = !fs::exists(cv_out);
        std::ofstream out(cv_out, std::ios::app);
        if (fresh) out << "learner,head,objective,k,seed,mean\n";
        out << cv_learner << ',' << cv_head << ',' << cv_obj << ',' << cv_k << ',' << cv_seed
            << ',' << report.mean << '\n';
      }
      return 0;
    }

    if (*solve_cmd) {
      const auto token = strategy_from_string(solve_strategy);
      if (!token) throw std::invalid_argument("unknown strategy: " + solve_strategy);
      const ModelSet models = load_models(solve_models);
      if (needs_regression_model(*token) && !models.regression)
        throw std::invalid_argument("strategy needs a regression model (--model)");
      if (needs_classification_model(*token) && !models.classification)
        throw std::invalid_argument("strategy needs a classification model (--model)");

      const JssInstance inst = parse_instance(read_file(solve_file));
      const Objective objective = parse_objective(solve_obj);
      const CpModel model = build_model(inst, objective);

      std::optional<Schedule> optimum;
      if (needs_optimum(*token)) {
        SolveLimits prove_limits;
        prove_limits.max_branches = solve_prove;
        const SolveResult proof = solve(model, Strategy::low_min(), prove_limits);
        if (proof.status != SolveStatus::Optimal)
          throw std::runtime_error("could not prove an optimum for the optsol strategy");
        optimum = proof.best_schedule;
      }

      const Strategy strategy = resolve_strategy(
          *token, inst, models.regression ? &*models.regression : nullptr,
          models.classification ? &*models.classification : nullptr,
          optimum ? &*optimum : nullptr, solve_seed);
      SolveLimits limits;
      limits.time_limit_secs = solve_cutoff;
      limits.max_branches = solve_branches;
      const SolveResult res = solve(model, strategy, limits);

      ResultRow row;
      row.instance_id = solve_seed;
      row.n_jobs = inst.job_count();
      row.n_machines = inst.machine_count();
      row.objective = objective;
      row.strategy = solve_strategy;
      row.status = res.status;
      row.best = res.best;
      row.first_incumbent = res.first_incumbent;
      row.branches = res.branches;
      row.fails = res.fails;
      row.seconds = res.elapsed_secs;
      std::printf("%s\n%s\n", kResultCsvHeader, to_csv(row).c_str());
      return 0;
    }

    if (*exp_cmd) {
      ExperimentConfig config;
      config.objective = parse_objective(exp_obj);
      for (const std::string& s : exp_sizes) config.sizes.push_back(parse_size(s));
      config.count = exp_count;
      for (const std::string& s : exp_strategies) {
        const auto token = strategy_from_string(s);
        if (!token) throw std::invalid_argument("unknown strategy: " + s);
        config.strategies.push_back(*token);
      }
      config.seed = exp_seed;
      config.h = exp_h;
      config.cutoff_secs = exp_cutoff;
      config.max_branches = exp_branches;
      config.prove_max_branches = exp_prove;
      config.reference = exp_reference;
      config.out_dir = exp_out;
      config.threads = exp_threads;

      const ModelSet models = load_models(exp_models);
      const ExperimentOutput output = run_experiment(
          config, models.regression ? &*models.regression : nullptr,
          models.classification ? &*models.classification : nullptr);
      std::printf("wrote %zu rows -> %s\n", output.rows.size(),
                  (fs::path(exp_out) / "results.csv").c_str());
      if (output.optsol_unproven > 0)
        std::fprintf(stderr, "warning: optsol rows skipped for %d unproven instance(s)\n",
                     output.optsol_unproven);
      return 0;
    }

    if (*report_cmd) {
      const auto rows = read_results_csv(report_in);
      const Report report = aggregate_results(rows, report_reference);
      write_report_csv(report, report_out);
      std::printf("wrote %zu aggregate rows -> %s\n", report.rows.size(), report_out.c_str());
      return 0;
    }
  } catch (const CLI::Error& e) {
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
