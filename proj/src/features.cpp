#include "jss/features.hpp"

#include <stdexcept>

namespace jss {

FeatureVector extract_raw(const JssInstance& inst, int j, int i) {
  if (j < 0 || j >= inst.job_count()) throw std::invalid_argument("job index out of range");
  const Job& job = inst.job(j);
  if (i < 0 || i >= static_cast<int>(job.ops.size()))
    throw std::invalid_argument("operation index out of range");

  int before = 0, after = 0;
  for (int k = 0; k < i; ++k) before += job.ops[static_cast<std::size_t>(k)].duration;
  for (int k = i + 1; k < static_cast<int>(job.ops.size()); ++k)
    after += job.ops[static_cast<std::size_t>(k)].duration;
  const Operation& o = job.ops[static_cast<std::size_t>(i)];

  FeatureVector f{};
  f[0] = i;                                         // NPO
  f[1] = o.duration;                                // PT
  f[2] = before;                                    // PTB
  f[3] = after;                                     // PTA
  f[4] = before + o.duration + after;               // TPT
  f[5] = job.due;                                   // DD
  f[6] = job.weight;                                // W
  f[7] = job.release;                               // RT
  f[8] = job.release + before;                      // EST
  f[9] = inst.machine_workload(o.machine);          // WL
  return f;
}

std::pair<FeatureVector, std::optional<double>> normalize(const JssInstance& inst, int j,
                                                          const FeatureVector& raw,
                                                          std::optional<double> label) {
  if (j < 0 || j >= inst.job_count()) throw std::invalid_argument("job index out of range");
  if (inst.max_tpt() <= 0) throw std::invalid_argument("instance has zero max TPT");
  if (inst.max_weight() <= 0) throw std::invalid_argument("instance has zero max weight");

  const double tpt_scale = 1.0 / inst.max_tpt();
  FeatureVector f = raw;
  f[0] = raw[0] / static_cast<double>(inst.job(j).ops.size());
  f[6] = raw[6] / static_cast<double>(inst.max_weight());
  for (int k : {1, 2, 3, 4, 5, 7, 8, 9}) f[static_cast<std::size_t>(k)] = raw[static_cast<std::size_t>(k)] * tpt_scale;

  std::optional<double> scaled_label;
  if (label) scaled_label = *label * tpt_scale;
  return {f, scaled_label};
}

double normalize_label(const JssInstance& inst, double label) {
  if (inst.max_tpt() <= 0) throw std::invalid_argument("instance has zero max TPT");
  return label / inst.max_tpt();
}

FeatureVector extract_normalized(const JssInstance& inst, int j, int i) {
  return normalize(inst, j, extract_raw(inst, j, i)).first;
}

}  // namespace jss
