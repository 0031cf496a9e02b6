#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jss/cp.hpp"
#include "jss/instance.hpp"
#include "jss/ml/dataset.hpp"
#include "jss/ml/model.hpp"
#include "jss/util/parallel.hpp"

namespace jss {

// (n_ref - n) / max(n_ref, n); 0 when both are 0. Positive means the
// candidate used fewer branches (or reached a better objective) than the
// reference.
double improvement(double n_ref, double n);

// CLI-facing strategy names. ml-* / hybrid-* need a trained model,
// optsol / hybrid-optsol need a proven optimum per instance.
enum class StrategyToken {
  Random,
  MinDom,
  LowMin,
  MlReg,
  MlCls,
  HybridReg,
  HybridCls,
  OptSol,
  HybridOptSol,
};

std::string to_string(StrategyToken token);
std::optional<StrategyToken> strategy_from_string(std::string_view name);
bool needs_regression_model(StrategyToken token);
bool needs_classification_model(StrategyToken token);
bool needs_optimum(StrategyToken token);

// Builds the concrete strategy for one instance. The models/optimum
// pointers may be null when the token does not need them.
Strategy resolve_strategy(StrategyToken token, const JssInstance& inst,
                          const ml::TrainedModel* regression, const ml::TrainedModel* classification,
                          const Schedule* optimum, std::uint64_t random_seed);

struct ResultRow {
  std::uint64_t instance_id = 0;  // generator seed
  int n_jobs = 0;
  int n_machines = 0;
  Objective objective = Objective::Cmax;
  std::string strategy;
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<long long> best;
  std::optional<long long> first_incumbent;
  long long branches = 0;
  long long fails = 0;
  double seconds = 0;

  std::string size() const { return std::to_string(n_jobs) + "x" + std::to_string(n_machines); }
};

extern const char* kResultCsvHeader;
std::string to_csv(const ResultRow& row);
void write_results_csv(std::span<const ResultRow> rows, const std::filesystem::path& path);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

struct StrategyAggregate {
  std::string size;
  std::string strategy;
  int n = 0;
  std::string metric;  // "branches" when the whole size group proved optimal, else "best"
  double mean_branches = 0, std_branches = 0;
  std::optional<double> imp_branches;
  std::optional<double> mean_best, std_best, imp_best;
  std::optional<double> mean_first, std_first, imp_first;
  std::optional<double> sign_p;  // vs the best-mean strategy; empty for itself
  std::optional<double> t_p;     // reported when n >= 30
};

struct Report {
  std::string reference;
  std::vector<StrategyAggregate> rows;
};

// Pure recomputation from raw rows; the `report` subcommand reproduces the
// experiment's report.csv byte for byte from results.csv.
Report aggregate_results(std::span<const ResultRow> rows, const std::string& reference);
void write_report_csv(const Report& report, const std::filesystem::path& path);

struct ExperimentConfig {
  Objective objective = Objective::Cmax;
  std::vector<std::pair<int, int>> sizes;  // (jobs, machines)
  int count = 25;
  std::vector<StrategyToken> strategies;
  std::uint64_t seed = 1;
  double h = 1.3;
  double cutoff_secs = 60.0;
  long long max_branches = std::numeric_limits<long long>::max();
  long long prove_max_branches = 100'000'000;  // optsol proving runs
  std::string reference = "random";
  std::filesystem::path out_dir;
  int threads = default_worker_count();
};

struct ExperimentOutput {
  std::vector<ResultRow> rows;
  Report report;
  int optsol_unproven = 0;  // instances skipped by optsol strategies
};

// One solve per instance x strategy, raw rows written to results.csv and
// the aggregated report to report.csv (if out_dir is set).
ExperimentOutput run_experiment(const ExperimentConfig& config, const ml::TrainedModel* regression,
                                const ml::TrainedModel* classification);

struct CorpusConfig {
  int count = 100;  // solved instances to deliver
  int n_jobs = 9;
  int n_machines = 9;
  Objective objective = Objective::Cmax;
  std::uint64_t seed = 1;
  double h = 1.3;
  long long budget_branches = 20'000'000;  // per-instance proof budget
  int max_attempts = 0;                    // 0 = 2 * count
  std::filesystem::path out_dir;
  int threads = default_worker_count();
};

struct CorpusResult {
  int requested = 0;
  int solved = 0;
  int attempted = 0;
  double collect_seconds = 0;
  std::vector<ml::SolvedInstance> instances;
  std::vector<std::uint64_t> seeds;  // generator seed per solved instance
};

// Generates and proves instances with LowMin until `count` are solved,
// skipping (and logging) any instance whose proof exhausts the branch
// budget. Writes instances/, optima/, both dataset CSVs and corpus_log.csv.
CorpusResult make_training_corpus(const CorpusConfig& config);

// Decision-boundary export: projected training points and a model-score
// grid over their bounding box.
void write_pca_boundary(const ml::TrainedModel& model2d, const ml::Dataset& projected,
                        const std::filesystem::path& points_csv,
                        const std::filesystem::path& grid_csv, int steps = 100);

}  // namespace jss
