#pragma once

#include <vector>

#include "jss/instance.hpp"
#include "jss/ml/model.hpp"
#include "jss/ordering.hpp"

namespace jss::ml {

// Raw regression scores per flat operation id. Scores are order-equivalent
// to predicted start times; they are never de-normalized.
std::vector<double> predict_start_times(const TrainedModel& model, const JssInstance& inst);

// Pairwise classification over each machine's operations: an operation
// gains one point per comparison that predicts it later. Sequences are
// sorted ascending by (score, EST, job, op index).
MachineSequences score_machine_sequences(const TrainedModel& model, const JssInstance& inst);

}  // namespace jss::ml
