#include "jss/ml/predict.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "jss/features.hpp"

namespace jss::ml {

std::vector<double> predict_start_times(const TrainedModel& model, const JssInstance& inst) {
  if (model.head() != Head::Regression)
    throw std::invalid_argument("predict_start_times needs a regression model");

  std::vector<double> scores(static_cast<std::size_t>(inst.op_count()));
  for (int v = 0; v < inst.op_count(); ++v) {
    const OpRef r = inst.op_ref(v);
    scores[static_cast<std::size_t>(v)] = model.evaluate(extract_normalized(inst, r.job, r.op));
  }
  return scores;
}

MachineSequences score_machine_sequences(const TrainedModel& model, const JssInstance& inst) {
  if (model.head() != Head::Classification)
    throw std::invalid_argument("score_machine_sequences needs a classification model");

  std::vector<FeatureVector> norm(static_cast<std::size_t>(inst.op_count()));
  for (int v = 0; v < inst.op_count(); ++v) {
    const OpRef r = inst.op_ref(v);
    norm[static_cast<std::size_t>(v)] = extract_normalized(inst, r.job, r.op);
  }

  MachineSequences seqs(static_cast<std::size_t>(inst.machine_count()));
  std::array<double, kFeatureCount> diff{};
  for (int m = 0; m < inst.machine_count(); ++m) {
    const auto& ops = inst.machine_ops(m);
    std::vector<int> score(ops.size(), 0);
    for (std::size_t ia = 0; ia < ops.size(); ++ia) {
      for (std::size_t ib = 0; ib < ops.size(); ++ib) {
        if (ia == ib) continue;
        for (int k = 0; k < kFeatureCount; ++k)
          diff[static_cast<std::size_t>(k)] =
              norm[static_cast<std::size_t>(ops[ia])][static_cast<std::size_t>(k)] -
              norm[static_cast<std::size_t>(ops[ib])][static_cast<std::size_t>(k)];
        if (model.evaluate(diff) > 0) ++score[ia];  // predicted later than ops[ib]
      }
    }

    auto& seq = seqs[static_cast<std::size_t>(m)];
    seq.reserve(ops.size());
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const OpRef r = inst.op_ref(ops[i]);
      seq.push_back(SeqEntry{r.job, r.op, score[i]});
    }
    std::sort(seq.begin(), seq.end(), [&](const SeqEntry& a, const SeqEntry& b) {
      return std::make_tuple(a.score, inst.earliest_start(a.job, a.op), a.job, a.op) <
             std::make_tuple(b.score, inst.earliest_start(b.job, b.op), b.job, b.op);
    });
  }
  return seqs;
}

}  // namespace jss::ml
