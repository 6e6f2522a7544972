#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "unitloc/activation.hpp"
#include "unitloc/errors.hpp"
#include "unitloc/localization.hpp"
#include "unitloc/units.hpp"

namespace unitloc {

// Neural responses paired 1:1 with text stimuli; targets are voxels or
// region averages. group_ids, when present, mark passage membership for
// grouped cross-validation.
struct NeuralDataset {
  std::vector<std::string> stimuli;
  MatrixXfRM responses;  // n_stimuli x n_targets
  std::vector<std::string> group_ids;  // empty or one per stimulus
  std::optional<double> noise_ceiling;

  void validate() const;
};

enum class SplitPolicy { shuffled, grouped };

struct EncoderConfig {
  int n_splits = 10;
  SplitPolicy policy = SplitPolicy::shuffled;
  std::vector<double> lambda_grid = {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
  bool standardize_features = true;
  double inner_val_fraction = 0.2;  // of the training split, for lambda
  std::uint64_t seed = 0;
};

// Closed-form ridge solution on (optionally) standardized features with an
// unpenalized intercept.
struct RidgeModel {
  Eigen::MatrixXd weights;       // n_features x n_targets
  Eigen::RowVectorXd intercept;  // 1 x n_targets
  Eigen::RowVectorXd feature_mean;
  Eigen::RowVectorXd feature_scale;  // 1.0 where the feature is constant
};

RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     double lambda, bool standardize = true);
Eigen::MatrixXd ridge_predict(const RidgeModel& model,
                              const Eigen::MatrixXd& X);

double pearson_r(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

struct AlignmentResult {
  double mean_r = 0.0;  // over targets and splits
  std::vector<double> split_mean_r;
  std::vector<double> chosen_lambda;
  // per split, the test-set group labels (grouped policy only)
  std::vector<std::vector<std::string>> split_test_groups;
};

// Cross-validated encoding score: fit on train (lambda picked on an inner
// validation subset), predict held-out, average per-target Pearson r.
// Grouped policy never splits a group across train/test.
AlignmentResult cv_alignment(const ActivationMatrix& features,
                             const UnitSet& units, const NeuralDataset& data,
                             const EncoderConfig& config);

struct CurvePoint {
  double percent = 0.0;
  std::string kind;  // selected | random
  std::optional<std::uint64_t> seed;
  std::size_t n_units = 0;
  double mean_r = 0.0;
  double dispersion = 0.0;  // sd over splits
};

std::vector<CurvePoint> alignment_curve(
    const ActivationMatrix& features, const SelectivityRanking& ranking,
    const NeuralDataset& data, const EncoderConfig& config,
    const std::vector<double>& percents = {0.03125, 0.0625, 0.125, 0.25, 0.5,
                                           1.0},
    int n_random_seeds = 3, std::uint64_t base_seed = 0);

// Synthetic neural data with a planted linear map: responses are a random
// linear readout of the planted units' activations plus Gaussian noise at
// the requested SNR (variance ratio). snr <= 0 or +inf means noiseless.
// The attainable score is sqrt(snr / (1 + snr)).
struct SyntheticNeuralSpec {
  int n_targets = 50;
  double snr = 1.0;
  std::uint64_t seed = 0;
  int n_groups = 0;  // 0 = no group structure
};

NeuralDataset make_synthetic_neural_dataset(const ActivationMatrix& features,
                                            const UnitSet& planted_units,
                                            const SyntheticNeuralSpec& spec);

// Random-feature ActivationMatrix for synthetic experiments.
ActivationMatrix make_synthetic_features(int n_stimuli,
                                         const ModelGeometry& g,
                                         std::uint64_t seed);

}  // namespace unitloc
