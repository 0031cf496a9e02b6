#pragma once

#include <array>
#include <optional>
#include <utility>

#include "jss/instance.hpp"

namespace jss {

inline constexpr int kFeatureCount = 10;

// f1..f10 in order: NPO, PT, PTB, PTA, TPT, DD, W, RT, EST, WL.
using FeatureVector = std::array<double, kFeatureCount>;

// Raw (unnormalized) features of operation (j, i). f1 is the 0-based count
// of precedent operations in the job.
FeatureVector extract_raw(const JssInstance& inst, int j, int i);

// Instance-level normalization: f1 by the job's operation count, f7 by the
// maximum job weight, everything else (and the optional label) by the
// maximum TPT. Normalization is strictly monotone per field, so relative
// order of predictions and labels is preserved.
std::pair<FeatureVector, std::optional<double>> normalize(const JssInstance& inst, int j,
                                                          const FeatureVector& raw,
                                                          std::optional<double> label = std::nullopt);

double normalize_label(const JssInstance& inst, double label);

FeatureVector extract_normalized(const JssInstance& inst, int j, int i);

}  // namespace jss
