#include "jss/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "jss/error.hpp"
#include "jss/ml/predict.hpp"
#include "jss/util/rng.hpp"
#include "jss/util/stats.hpp"

namespace jss {

double improvement(double n_ref, double n) {
  if (n_ref < 0 || n < 0) throw std::invalid_argument("improvement needs non-negative counts");
  const double denom = std::max(n_ref, n);
  if (denom == 0) return 0.0;
  return (n_ref - n) / denom;
}

std::string to_string(StrategyToken token) {
  switch (token) {
    case StrategyToken::Random: return "random";
    case StrategyToken::MinDom: return "mindom";
    case StrategyToken::LowMin: return "lowmin";
    case StrategyToken::MlReg: return "ml-reg";
    case StrategyToken::MlCls: return "ml-cls";
    case StrategyToken::HybridReg: return "hybrid-reg";
    case StrategyToken::HybridCls: return "hybrid-cls";
    case StrategyToken::OptSol: return "optsol";
    case StrategyToken::HybridOptSol: return "hybrid-optsol";
  }
  return "?";
}

std::optional<StrategyToken> strategy_from_string(std::string_view name) {
  for (StrategyToken t : {StrategyToken::Random, StrategyToken::MinDom, StrategyToken::LowMin,
                          StrategyToken::MlReg, StrategyToken::MlCls, StrategyToken::HybridReg,
                          StrategyToken::HybridCls, StrategyToken::OptSol,
                          StrategyToken::HybridOptSol}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

bool needs_regression_model(StrategyToken token) {
  return token == StrategyToken::MlReg || token == StrategyToken::HybridReg;
}

bool needs_classification_model(StrategyToken token) {
  return token == StrategyToken::MlCls || token == StrategyToken::HybridCls;
}

bool needs_optimum(StrategyToken token) {
  return token == StrategyToken::OptSol || token == StrategyToken::HybridOptSol;
}

Strategy resolve_strategy(StrategyToken token, const JssInstance& inst,
                          const ml::TrainedModel* regression, const ml::TrainedModel* classification,
                          const Schedule* optimum, std::uint64_t random_seed) {
  switch (token) {
    case StrategyToken::Random:
      return Strategy::random(random_seed);
    case StrategyToken::MinDom:
      return Strategy::min_dom();
    case StrategyToken::LowMin:
      return Strategy::low_min();
    case StrategyToken::MlReg:
    case StrategyToken::HybridReg: {
      if (!regression) throw std::invalid_argument("strategy needs a regression model");
      auto order = order_from_regression(inst, ml::predict_start_times(*regression, inst));
      return token == StrategyToken::MlReg ? Strategy::static_order(std::move(order))
                                           : Strategy::hybrid(std::move(order));
    }
    case StrategyToken::MlCls:
    case StrategyToken::HybridCls: {
      if (!classification) throw std::invalid_argument("strategy needs a classification model");
      auto order = order_from_classification(inst, ml::score_machine_sequences(*classification, inst));
      return token == StrategyToken::MlCls ? Strategy::static_order(std::move(order))
                                           : Strategy::hybrid(std::move(order));
    }
    case StrategyToken::OptSol:
    case StrategyToken::HybridOptSol: {
      if (!optimum) throw std::invalid_argument("strategy needs a proven optimum");
      auto order = order_from_solution(inst, *optimum);
      return token == StrategyToken::OptSol ? Strategy::static_order(std::move(order))
                                            : Strategy::hybrid(std::move(order));
    }
  }
  throw std::invalid_argument("unknown strategy token");
}

const char* kResultCsvHeader =
    "instance,jobs,machines,objective,strategy,status,best,first_incumbent,branches,fails,seconds";

std::string to_csv(const ResultRow& row) {
  std::ostringstream out;
  out << row.instance_id << ',' << row.n_jobs << ',' << row.n_machines << ','
      << to_string(row.objective) << ',' << row.strategy << ',' << to_string(row.status) << ',';
  if (row.best) out << *row.best;
  out << ',';
  if (row.first_incumbent) out << *row.first_incumbent;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", row.seconds);
  out << ',' << row.branches << ',' << row.fails << ',' << buf;
  return out.str();
}

void write_results_csv(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << kResultCsvHeader << '\n';
  for (const ResultRow& row : rows) out << to_csv(row) << '\n';
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty results file");
  if (line != kResultCsvHeader) throw FormatError("unexpected results header: " + line);

  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string cell;
    auto next = [&] {
      if (!std::getline(ls, cell, ','))
        throw FormatError("truncated results row at line " + std::to_string(lineno));
      return cell;
    };
    ResultRow row;
    row.instance_id = std::stoull(next());
    row.n_jobs = std::stoi(next());
    row.n_machines = std::stoi(next());
    const auto obj = objective_from_string(next());
    if (!obj) throw FormatError("bad objective at line " + std::to_string(lineno));
    row.objective = *obj;
    row.strategy = next();
    const std::string status = next();
    if (status == "optimal") row.status = SolveStatus::Optimal;
    else if (status == "feasible") row.status = SolveStatus::Feasible;
    else if (status == "infeasible") row.status = SolveStatus::Infeasible;
    else throw FormatError("bad status at line " + std::to_string(lineno));
    const std::string best = next();
    if (!best.empty()) row.best = std::stoll(best);
    const std::string first = next();
    if (!first.empty()) row.first_incumbent = std::stoll(first);
    row.branches = std::stoll(next());
    row.fails = std::stoll(next());
    row.seconds = std::stod(next());
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

std::string fmt_opt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  return buf;
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Report aggregate_results(std::span<const ResultRow> rows, const std::string& reference) {
  Report report;
  report.reference = reference;

  // Preserve first-appearance order of sizes and of strategies within a size.
  std::vector<std::string> sizes;
  for (const ResultRow& row : rows) {
    const std::string size = row.size();
    if (std::find(sizes.begin(), sizes.end(), size) == sizes.end()) sizes.push_back(size);
  }

  for (const std::string& size : sizes) {
    std::vector<std::string> strategies;
    bool all_optimal = true;
    for (const ResultRow& row : rows) {
      if (row.size() != size) continue;
      if (std::find(strategies.begin(), strategies.end(), row.strategy) == strategies.end())
        strategies.push_back(row.strategy);
      if (row.status != SolveStatus::Optimal) all_optimal = false;
    }
    const std::string metric = all_optimal ? "branches" : "best";

    // Per-strategy per-instance metric values.
    auto values_of = [&](const std::string& strategy, auto getter) {
      std::map<std::uint64_t, double> out;
      for (const ResultRow& row : rows) {
        if (row.size() != size || row.strategy != strategy) continue;
        const auto v = getter(row);
        if (v) out[row.instance_id] = *v;
      }
      return out;
    };
    auto branch_of = [](const ResultRow& r) { return std::optional<double>(static_cast<double>(r.branches)); };
    auto best_of = [](const ResultRow& r) {
      return r.best ? std::optional<double>(static_cast<double>(*r.best)) : std::nullopt;
    };
    auto first_of = [](const ResultRow& r) {
      return r.first_incumbent ? std::optional<double>(static_cast<double>(*r.first_incumbent))
                               : std::nullopt;
    };
    auto metric_of = [&](const std::string& strategy) {
      return metric == "branches" ? values_of(strategy, branch_of) : values_of(strategy, best_of);
    };

    // Strategy with the best (lowest) mean of the group metric.
    std::string best_strategy;
    double best_mean = 0;
    for (const std::string& strategy : strategies) {
      const auto vals = metric_of(strategy);
      if (vals.empty()) continue;
      double m = 0;
      for (const auto& [id, v] : vals) m += v;
      m /= static_cast<double>(vals.size());
      if (best_strategy.empty() || m < best_mean) {
        best_strategy = strategy;
        best_mean = m;
      }
    }

    for (const std::string& strategy : strategies) {
      StrategyAggregate agg;
      agg.size = size;
      agg.strategy = strategy;
      agg.metric = metric;

      const auto branches = values_of(strategy, branch_of);
      const auto best_vals = values_of(strategy, best_of);
      const auto first_vals = values_of(strategy, first_of);
      agg.n = 0;
      for (const ResultRow& row : rows)
        if (row.size() == size && row.strategy == strategy) ++agg.n;

      auto stats_of = [](const std::map<std::uint64_t, double>& vals) {
        std::vector<double> xs;
        xs.reserve(vals.size());
        for (const auto& [id, v] : vals) xs.push_back(v);
        return std::pair<double, double>(mean(xs), sample_std(xs));
      };
      std::tie(agg.mean_branches, agg.std_branches) = stats_of(branches);
      if (!best_vals.empty()) {
        auto [m, s] = stats_of(best_vals);
        agg.mean_best = m;
        agg.std_best = s;
      }
      if (!first_vals.empty()) {
        auto [m, s] = stats_of(first_vals);
        agg.mean_first = m;
        agg.std_first = s;
      }

      // Improvements vs the reference strategy, paired by instance.
      auto improvement_vs_ref = [&](auto getter) -> std::optional<double> {
        const auto ref_vals = values_of(reference, getter);
        const auto mine = values_of(strategy, getter);
        std::vector<double> imps;
        for (const auto& [id, v] : mine) {
          const auto it = ref_vals.find(id);
          if (it != ref_vals.end()) imps.push_back(improvement(it->second, v));
        }
        if (imps.empty()) return std::nullopt;
        return mean(imps);
      };
      agg.imp_branches = improvement_vs_ref(branch_of);
      agg.imp_best = improvement_vs_ref(best_of);
      agg.imp_first = improvement_vs_ref(first_of);

      // Paired tests against the best-mean strategy.
      if (!best_strategy.empty() && strategy != best_strategy) {
        const auto best_metric_vals = metric_of(best_strategy);
        const auto mine = metric_of(strategy);
        long long wins = 0, losses = 0;
        std::vector<double> diffs;
        for (const auto& [id, v] : mine) {
          const auto it = best_metric_vals.find(id);
          if (it == best_metric_vals.end()) continue;
          if (v < it->second) ++wins;
          else if (v > it->second) ++losses;
          diffs.push_back(v - it->second);
        }
        if (!diffs.empty()) {
          agg.sign_p = sign_test_p(wins, losses);
          if (diffs.size() >= 30) agg.t_p = paired_t_test_p(diffs);
        }
      }

      report.rows.push_back(std::move(agg));
    }
  }
  return report;
}

void write_report_csv(const Report& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "size,strategy,n,metric,mean_branches,std_branches,imp_branches_vs_ref,"
         "mean_best,std_best,imp_best_vs_ref,mean_first_incumbent,std_first_incumbent,"
         "imp_first_vs_ref,sign_p_vs_best,t_p_vs_best,reference\n";
  for (const StrategyAggregate& agg : report.rows) {
    out << agg.size << ',' << agg.strategy << ',' << agg.n << ',' << agg.metric << ','
        << fmt_num(agg.mean_branches) << ',' << fmt_num(agg.std_branches) << ','
        << fmt_opt(agg.imp_branches) << ',' << fmt_opt(agg.mean_best) << ','
        << fmt_opt(agg.std_best) << ',' << fmt_opt(agg.imp_best) << ',' << fmt_opt(agg.mean_first)
        << ',' << fmt_opt(agg.std_first) << ',' << fmt_opt(agg.imp_first) << ','
        << fmt_opt(agg.sign_p) << ',' << fmt_opt(agg.t_p) << ',' << report.reference << '\n';
  }
}

ExperimentOutput run_experiment(const ExperimentConfig& config, const ml::TrainedModel* regression,
                                const ml::TrainedModel* classification) {
  if (config.sizes.empty()) throw std::invalid_argument("experiment needs at least one size");
  if (config.strategies.empty()) throw std::invalid_argument("experiment needs at least one strategy");
  if (config.count < 1) throw std::invalid_argument("experiment needs at least one instance");
  if (config.cutoff_secs <= 0) throw std::invalid_argument("cutoff must be positive");
  for (StrategyToken token : config.strategies) {
    if (needs_regression_model(token) && !regression)
      throw std::invalid_argument("strategy " + to_string(token) + " needs a regression model");
    if (needs_classification_model(token) && !classification)
      throw std::invalid_argument("strategy " + to_string(token) + " needs a classification model");
  }
  const bool prove = std::any_of(config.strategies.begin(), config.strategies.end(), needs_optimum);

  ExperimentOutput output;
  std::atomic<int> unproven{0};

  for (const auto& [jobs, machines] : config.sizes) {
    std::vector<std::vector<ResultRow>> per_instance(static_cast<std::size_t>(config.count));

    parallel_for(config.count, config.threads, [&](int k) {
      const std::uint64_t inst_seed = config.seed + static_cast<std::uint64_t>(k);
      const JssInstance inst = generate(jobs, machines, config.h, inst_seed);
      const CpModel model = build_model(inst, config.objective);

      std::optional<Schedule> optimum;
      if (prove) {
        SolveLimits prove_limits;
        prove_limits.max_branches = config.prove_max_branches;
        const SolveResult proof = solve(model, Strategy::low_min(), prove_limits);
        if (proof.status == SolveStatus::Optimal)
          optimum = proof.best_schedule;
        else
          unproven.fetch_add(1);
      }

      auto& rows = per_instance[static_cast<std::size_t>(k)];
      for (StrategyToken token : config.strategies) {
        if (needs_optimum(token) && !optimum) continue;  // recorded via optsol_unproven
        const Strategy strategy =
            resolve_strategy(token, inst, regression, classification,
                             optimum ? &*optimum : nullptr, splitmix64(inst_seed));
        SolveLimits limits;
        limits.time_limit_secs = config.cutoff_secs;
        limits.max_branches = config.max_branches;
        const SolveResult res = solve(model, strategy, limits);

        ResultRow row;
        row.instance_id = inst_seed;
        row.n_jobs = jobs;
        row.n_machines = machines;
        row.objective = config.objective;
        row.strategy = to_string(token);
        row.status = res.status;
        row.best = res.best;
        row.first_incumbent = res.first_incumbent;
        row.branches = res.branches;
        row.fails = res.fails;
        row.seconds = res.elapsed_secs;
        rows.push_back(std::move(row));
      }
    });

    for (auto& rows : per_instance)
      for (auto& row : rows) output.rows.push_back(std::move(row));
  }

  output.optsol_unproven = unproven.load();
  output.report = aggregate_results(output.rows, config.reference);

  if (!config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    write_results_csv(output.rows, config.out_dir / "results.csv");
    write_report_csv(output.report, config.out_dir / "report.csv");
  }
  return output;
}

CorpusResult make_training_corpus(const CorpusConfig& config) {
  if (config.count < 1) throw std::invalid_argument("corpus needs count >= 1");
  if (config.budget_branches < 1) throw std::invalid_argument("corpus budget must be positive");

  const auto t0 = std::chrono::steady_clock::now();
  const int max_attempts = config.max_attempts > 0 ? config.max_attempts : 2 * config.count;

  struct Attempt {
    std::uint64_t seed = 0;
    SolveResult result;
    std::optional<JssInstance> instance;
  };
  std::vector<Attempt> attempts;

  CorpusResult out;
  out.requested = config.count;

  int solved = 0;
  int next_attempt = 0;
  while (solved < config.count && next_attempt < max_attempts) {
    const int wave = std::min(std::max(config.threads, 1) * 2, max_attempts - next_attempt);
    const std::size_t base = attempts.size();
    attempts.resize(base + static_cast<std::size_t>(wave));

    parallel_for(wave, config.threads, [&](int i) {
      Attempt& a = attempts[base + static_cast<std::size_t>(i)];
      a.seed = config.seed + static_cast<std::uint64_t>(next_attempt + i);
      a.instance = generate(config.n_jobs, config.n_machines, config.h, a.seed);
      SolveLimits limits;
      limits.max_branches = config.budget_branches;
      a.result = solve(build_model(*a.instance, config.objective), Strategy::low_min(), limits);
    });

    next_attempt += wave;
    solved = 0;
    for (const Attempt& a : attempts)
      if (a.result.status == SolveStatus::Optimal) ++solved;
  }

  // First `count` proven attempts, in attempt order.
  for (Attempt& a : attempts) {
    if (out.solved >= config.count) break;
    if (a.result.status != SolveStatus::Optimal) continue;
    ml::SolvedInstance si;
    si.instance = std::move(*a.instance);
    si.optimum = *a.result.best_schedule;
    si.id = out.solved;
    out.instances.push_back(std::move(si));
    out.seeds.push_back(a.seed);
    ++out.solved;
  }
  out.attempted = static_cast<int>(attempts.size());
  out.collect_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (!config.out_dir.empty()) {
    namespace fs = std::filesystem;
    fs::create_directories(config.out_dir / "instances");
    fs::create_directories(config.out_dir / "optima");

    char name[64];
    for (const ml::SolvedInstance& si : out.instances) {
      std::snprintf(name, sizeof name, "inst_%04d.jss", si.id);
      std::ofstream f(config.out_dir / "instances" / name);
      f << serialize_native(si.instance);
      std::snprintf(name, sizeof name, "inst_%04d.sol", si.id);
      std::ofstream g(config.out_dir / "optima" / name);
      g << serialize_schedule(si.instance, si.optimum);
    }

    ml::write_dataset_csv(ml::build_regression_dataset(out.instances),
                          config.out_dir / "regression.csv");
    ml::write_dataset_csv(ml::build_classification_dataset(out.instances),
                          config.out_dir / "classification.csv");

    std::ofstream log(config.out_dir / "corpus_log.csv");
    log << "attempt,seed,status,value,branches,solved_id\n";
    int id = 0;
    for (std::size_t i = 0; i < attempts.size(); ++i) {
      const Attempt& a = attempts[i];
      const bool counted = a.result.status == SolveStatus::Optimal && id < config.count;
      log << i << ',' << a.seed << ',' << to_string(a.result.status) << ',';
      if (a.result.best) log << *a.result.best;
      log << ',' << a.result.branches << ',';
      if (counted) log << id++;
      log << '\n';
    }
  }
  return out;
}

void write_pca_boundary(const ml::TrainedModel& model2d, const ml::Dataset& projected,
                        const std::filesystem::path& points_csv,
                        const std::filesystem::path& grid_csv, int steps) {
  if (projected.dim != 2) throw std::invalid_argument("expected a 2-D projected dataset");
  if (model2d.input_dim() != 2) throw std::invalid_argument("expected a model over 2 inputs");
  if (steps < 2) throw std::invalid_argument("grid needs at least 2 steps");

  double lo[2] = {projected.row(0)[0], projected.row(0)[1]};
  double hi[2] = {lo[0], lo[1]};
  for (int r = 0; r < projected.rows(); ++r) {
    for (int d = 0; d < 2; ++d) {
      lo[d] = std::min(lo[d], projected.row(r)[static_cast<std::size_t>(d)]);
      hi[d] = std::max(hi[d], projected.row(r)[static_cast<std::size_t>(d)]);
    }
  }
  for (int d = 0; d < 2; ++d) {
    const double margin = 0.05 * std::max(1e-9, hi[d] - lo[d]);
    lo[d] -= margin;
    hi[d] += margin;
  }

  {
    std::ofstream out(points_csv);
    if (!out) throw std::runtime_error("cannot open " + points_csv.string() + " for writing");
    out << "z1,z2,label\n";
    char buf[96];
    for (int r = 0; r < projected.rows(); ++r) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g", projected.row(r)[0], projected.row(r)[1],
                    projected.labels[static_cast<std::size_t>(r)]);
      out << buf << '\n';
    }
  }
  {
    std::ofstream out(grid_csv);
    if (!out) throw std::runtime_error("cannot open " + grid_csv.string() + " for writing");
    out << "z1,z2,score\n";
    char buf[96];
    for (int i = 0; i < steps; ++i) {
      for (int k = 0; k < steps; ++k) {
        const double x[2] = {lo[0] + (hi[0] - lo[0]) * i / (steps - 1),
                             lo[1] + (hi[1] - lo[1]) * k / (steps - 1)};
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g", x[0], x[1], model2d.evaluate(x));
        out << buf << '\n';
      }
    }
  }
}

}  // namespace jss
