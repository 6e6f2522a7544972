#include "unitloc/profiles.hpp"

#include <cmath>

namespace unitloc {

const char* to_string(Normalization n) {
  return n == Normalization::zscore_per_unit ? "zscore_per_unit" : "raw";
}

const ConditionProfile::Entry& ConditionProfile::at(
    const std::string& label) const {
  for (const auto& e : entries) {
    if (e.label == label) return e;
  }
  throw UnknownLabelError("no profile entry for condition: " + label);
}

ConditionProfile condition_profile_from_activations(
    const std::map<std::string, ActivationMatrix>& captured,
    const UnitSet& units, Normalization normalization) {
  if (captured.empty()) {
    throw CountMismatchError("no conditions to profile");
  }
  if (units.empty()) throw EmptyUnitSetError("condition_profile: no units");

  const auto n_per = captured.begin()->second.n_stimuli();
  for (const auto& [label, acts] : captured) {
    acts.validate();
    if (acts.n_stimuli() != n_per) {
      throw CountMismatchError("condition '" + label +
                               "' has a different stimulus count");
    }
    if (!(acts.geometry == captured.begin()->second.geometry)) {
      throw ShapeMismatchError("conditions captured on different universes");
    }
  }

  // responses restricted to the unit set, stacked across conditions
  const auto k = static_cast<Eigen::Index>(units.size());
  const auto n_conditions = static_cast<Eigen::Index>(captured.size());
  Eigen::MatrixXd stacked(n_conditions * n_per, k);
  std::vector<std::string> labels;
  {
    Eigen::Index row = 0;
    for (const auto& [label, acts] : captured) {
      labels.push_back(label);
      Eigen::Index c = 0;
      for (const auto& u : units) {
        stacked.col(c).segment(row, n_per) =
            acts.values.col(u.flat(acts.geometry)).cast<double>();
        ++c;
      }
      row += n_per;
    }
  }

  if (normalization == Normalization::zscore_per_unit) {
    const Eigen::RowVectorXd mean = stacked.colwise().mean();
    stacked.rowwise() -= mean;
    Eigen::RowVectorXd sd =
        (stacked.array().square().colwise().sum() /
         double(stacked.rows()))
            .sqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
      if (sd[j] == 0.0) sd[j] = 1.0;
    }
    stacked.array().rowwise() /= sd.array();
  }

  ConditionProfile profile;
  profile.normalization = normalization;
  for (std::size_t ci = 0; ci < labels.size(); ++ci) {
    const auto row0 = static_cast<Eigen::Index>(ci) * n_per;
    // mean over units for each stimulus
    Eigen::VectorXd per_stimulus =
        stacked.middleRows(row0, n_per).rowwise().mean();
    const double mean = per_stimulus.mean();
    const double sd =
        n_per > 1 ? std::sqrt((per_stimulus.array() - mean).square().sum() /
                              double(n_per - 1))
                  : 0.0;
    profile.entries.push_back(ConditionProfile::Entry{
        labels[ci], mean, sd, static_cast<int>(n_per)});
    profile.samples[labels[ci]] = std::move(per_stimulus);
  }
  return profile;
}

ConditionProfile condition_profile(
    const TransformerModel& model, const UnitSet& units,
    const std::map<std::string, StimulusSet>& conditions,
    Normalization normalization, int max_tokens) {
  std::map<std::string, ActivationMatrix> captured;
  for (const auto& [label, stimuli] : conditions) {
    captured[label] = capture_pooled_activations(
        model, stimuli, Pooling::last_token, max_tokens);
  }
  return condition_profile_from_activations(captured, units, normalization);
}

WelchResult profile_contrast_test(const Eigen::VectorXd& samples_a,
                                  const Eigen::VectorXd& samples_b) {
  return welch_t(samples_a, samples_b);
}

}  // namespace unitloc
