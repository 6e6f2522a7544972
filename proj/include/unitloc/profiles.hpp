#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <vector>

#include "unitloc/localization.hpp"
#include "unitloc/model.hpp"

namespace unitloc {

enum class Normalization { zscore_per_unit, raw };

const char* to_string(Normalization n);

// Condition-level summary of the selected units' responses, plus the
// per-stimulus mean responses each summary was computed from.
struct ConditionProfile {
  struct Entry {
    std::string label;
    double mean = 0.0;
    double dispersion = 0.0;  // sd over per-stimulus means
    int n_stimuli = 0;
  };
  std::vector<Entry> entries;  // sorted by label
  Normalization normalization = Normalization::zscore_per_unit;
  std::map<std::string, Eigen::VectorXd> samples;  // label -> per-stimulus

  const Entry& at(const std::string& label) const;
};

// Captures last-token pooled activations per condition (max_tokens as in
// the language localizer), optionally z-scores each unit across the union
// of all profile stimuli, then averages over units per stimulus and over
// stimuli per condition.
ConditionProfile condition_profile(
    const TransformerModel& model, const UnitSet& units,
    const std::map<std::string, StimulusSet>& conditions,
    Normalization normalization = Normalization::zscore_per_unit,
    int max_tokens = 12);

// Same computation over an already-captured activation matrix per
// condition (rows = stimuli), for tests and cached pipelines.
ConditionProfile condition_profile_from_activations(
    const std::map<std::string, ActivationMatrix>& captured,
    const UnitSet& units, Normalization normalization);

// Welch t on per-stimulus mean responses; upper tail = a > b.
WelchResult profile_contrast_test(const Eigen::VectorXd& samples_a,
                                  const Eigen::VectorXd& samples_b);

}  // namespace unitloc
