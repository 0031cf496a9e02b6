#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "jss/instance.hpp"
#include "jss/ordering.hpp"

namespace jss {

// Bounds model of the constraint network: one start-time interval per
// operation plus precomputed topology for propagation. Initial lb is the
// operation's EST, initial ub is horizon - duration.
struct CpModel {
  JssInstance instance;
  Objective objective = Objective::Cmax;
  int horizon = 0;
  std::vector<int> initial_lb;
  std::vector<int> initial_ub;

  // Per flat operation id.
  std::vector<int> duration;
  std::vector<int> job_succ;  // -1 if last in its job
  std::vector<int> job_pred;  // -1 if first
  std::vector<int> peer_begin;  // CSR of same-machine peers
  std::vector<int> peers;
  std::vector<int> last_ops;    // flat id of each job's last operation
  std::vector<int> machine_of;  // machine per flat operation id
};

CpModel build_model(const JssInstance& inst, Objective obj);

// Trailed search state over the model's bounds, plus the incumbent bound
// used by the objective cut. Counters live here so variable selection can
// hash them.
class SearchState {
 public:
  explicit SearchState(const CpModel& model);

  const CpModel& model() const { return *model_; }
  int var_count() const { return static_cast<int>(lb_.size()); }
  int lb(int v) const { return lb_[static_cast<std::size_t>(v)]; }
  int ub(int v) const { return ub_[static_cast<std::size_t>(v)]; }
  bool fixed(int v) const { return lb(v) == ub(v); }
  bool all_fixed() const;
  BoundsView view() const;

  std::size_t mark() const { return trail_.size(); }
  // Restores bounds exactly to the state at the mark and drops any pending
  // propagation work.
  void undo_to(std::size_t m);

  // Trailed bound updates; both enqueue the variable for propagation and
  // return false when the domain empties.
  bool tighten_lb(int v, int value);
  bool tighten_ub(int v, int value);

  // Re-marks every variable and machine pending, forcing the next propagate
  // call to rebuild the fixpoint from scratch (used after restarts).
  void enqueue_all();

  void set_incumbent_bound(long long z) { zstar_ = z; }
  std::optional<long long> incumbent_bound() const { return zstar_; }

  struct EfTask {
    int est;
    int lct;
    int dur;
    int var;
  };

  long long branches = 0;
  long long fails = 0;

 private:
  friend bool propagate(SearchState& st);

  void enqueue(int v);
  int pop_queue();

  const CpModel* model_;
  std::vector<int> lb_;
  std::vector<int> ub_;
  struct TrailEntry {
    std::int32_t slot;  // 2*var for lb, 2*var+1 for ub
    std::int32_t old_value;
  };
  std::vector<TrailEntry> trail_;
  std::vector<int> queue_;
  std::size_t queue_head_ = 0;
  std::vector<std::uint8_t> in_queue_;
  std::vector<std::uint8_t> machine_dirty_;  // edge finding pending per machine
  std::optional<long long> zstar_;
  std::vector<EfTask> ef_tasks_;
  std::vector<std::pair<int, int>> ef_updates_;
};

// Runs release/precedence/disjunctive rules plus the objective cut against
// the incumbent to a bounds fixpoint. Returns false on failure (some domain
// emptied or a machine pair admits no order).
bool propagate(SearchState& st);

struct SolveLimits {
  double time_limit_secs = std::numeric_limits<double>::infinity();
  long long max_branches = std::numeric_limits<long long>::max();
};

enum class SolveStatus { Optimal, Feasible, Infeasible };

std::string to_string(SolveStatus status);

struct SolveResult {
  SolveStatus status = SolveStatus::Infeasible;
  std::optional<long long> best;
  std::optional<long long> first_incumbent;
  std::optional<Schedule> best_schedule;
  long long branches = 0;
  long long fails = 0;
  double elapsed_secs = 0;
};

// Depth-first branch and bound with min-value labelling: left child assigns
// the selected variable its lower bound, right child bumps the lower bound
// by one. The branch counter counts child nodes entered.
SolveResult solve(const CpModel& model, const Strategy& strategy, const SolveLimits& limits = {});

}  // namespace jss
