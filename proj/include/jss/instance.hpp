#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace jss {

enum class Objective { Cmax, Tmax, Twt };

std::string to_string(Objective obj);
std::optional<Objective> objective_from_string(std::string_view token);

struct Operation {
  int machine = 0;
  int duration = 0;
};

struct Job {
  int release = 0;
  int due = 0;
  int weight = 1;
  std::vector<Operation> ops;

  // TPT: total processing time over the job's route.
  int total_processing() const;
};

// Identifies one operation as (job, position in route), both 0-based.
struct OpRef {
  int job = 0;
  int op = 0;

  friend bool operator==(const OpRef&, const OpRef&) = default;
  friend auto operator<=>(const OpRef&, const OpRef&) = default;
};

// An immutable job shop instance. Construction validates all invariants:
// machine indices in range, no machine visited twice by one job, durations
// >= 1, release/due >= 0, weight >= 1.
class JssInstance {
 public:
  JssInstance() = default;  // empty placeholder, assign before use
  JssInstance(std::vector<Job> jobs, int machine_count);

  int job_count() const { return static_cast<int>(jobs_.size()); }
  int machine_count() const { return machine_count_; }
  const Job& job(int j) const { return jobs_[static_cast<std::size_t>(j)]; }
  const std::vector<Job>& jobs() const { return jobs_; }

  // Flat operation ids: jobs laid out consecutively in route order.
  int op_count() const { return op_count_; }
  int flat_id(int j, int i) const { return offsets_[static_cast<std::size_t>(j)] + i; }
  OpRef op_ref(int flat) const;
  const Operation& op(int flat) const;
  const Operation& op(int j, int i) const { return jobs_[static_cast<std::size_t>(j)].ops[static_cast<std::size_t>(i)]; }

  // WL: total processing time of all operations hosted by a machine.
  int machine_workload(int m) const { return workload_[static_cast<std::size_t>(m)]; }
  // Flat ids of the operations hosted by a machine, in flat-id order.
  const std::vector<int>& machine_ops(int m) const { return machine_ops_[static_cast<std::size_t>(m)]; }

  int max_tpt() const { return max_tpt_; }
  int max_weight() const { return max_weight_; }

  // EST of operation (j, i): release plus upstream processing in the job.
  int earliest_start(int j, int i) const;
  int earliest_start(int flat) const;

  // max_j r_j + sum of all durations; every schedule fits below it.
  int horizon() const { return horizon_; }

  bool operator==(const JssInstance& other) const;

 private:
  std::vector<Job> jobs_;
  int machine_count_ = 0;
  int op_count_ = 0;
  std::vector<int> offsets_;
  std::vector<OpRef> refs_;
  std::vector<int> workload_;
  std::vector<std::vector<int>> machine_ops_;
  int max_tpt_ = 0;
  int max_weight_ = 0;
  int horizon_ = 0;
};

// Start times indexed by flat operation id. End times are always derived
// as start + duration, never stored.
struct Schedule {
  std::vector<int> start;

  int at(const JssInstance& inst, int j, int i) const {
    return start[static_cast<std::size_t>(inst.flat_id(j, i))];
  }
};

// d_j = r_j + ceil(h * TPT_j), with a guard against ulp noise in h * tpt.
int due_from_allowance(double h, int release, int tpt);

// Random instance: each job's route is a uniform permutation of all M
// machines, p in [1,99], r in [0, floor(12.5*M)], w in [1,10],
// d = r + ceil(h*TPT). Deterministic in seed.
JssInstance generate(int n_jobs, int n_machines, double h, std::uint64_t seed);

// OR-library layout: header "N M", then N lines of M "machine duration"
// pairs, machines 0-based. Parsed jobs get r=0, w=1, d=0.
JssInstance parse_orlib(const std::string& text);

// Native layout: header "N M native-v1", then N lines "r d w  m1 p1 m2 p2 ...".
JssInstance parse_native(const std::string& text);

// Dispatches on the header line.
JssInstance parse_instance(const std::string& text);

std::string serialize_orlib(const JssInstance& inst);
std::string serialize_native(const JssInstance& inst);

// Schedule files: header "sol-v1 N M", then N lines of start times.
std::string serialize_schedule(const JssInstance& inst, const Schedule& s);
Schedule parse_schedule(const JssInstance& inst, const std::string& text);

// Objective value of a feasible schedule; throws FeasibilityError naming the
// violated constraint otherwise.
long long evaluate(const JssInstance& inst, const Schedule& s, Objective obj);

struct BruteForceResult {
  long long value = 0;
  Schedule schedule;
};

// Exact optimum by enumerating all per-machine operation orders and
// left-shifting each acyclic combination. Guarded: the product of
// per-machine permutation counts must not exceed 1e7.
BruteForceResult brute_force_optimum(const JssInstance& inst, Objective obj);

}  // namespace jss
