#include "unitloc/encoding.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "unitloc/rng.hpp"

namespace unitloc {

void NeuralDataset::validate() const {
  if (responses.rows() != static_cast<Eigen::Index>(stimuli.size())) {
    throw ShapeMismatchError("responses rows != stimuli count");
  }
  if (!responses.allFinite()) {
    throw ShapeMismatchError("responses contain NaN/Inf");
  }
  if (!group_ids.empty() && group_ids.size() != stimuli.size()) {
    throw ShapeMismatchError("group_ids must be empty or one per stimulus");
  }
}

RidgeModel ridge_fit(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     double lambda, bool standardize) {
  if (X.rows() != Y.rows()) {
    throw ShapeMismatchError("ridge_fit: X and Y row counts differ");
  }
  if (X.rows() < 2) {
    throw DegenerateDesignError("ridge_fit needs >= 2 rows");
  }
  if (!(lambda > 0.0)) {
    throw DegenerateDesignError("ridge_fit: lambda must be > 0");
  }
  const Eigen::Index n = X.rows(), f = X.cols();

  RidgeModel model;
  model.feature_mean = X.colwise().mean();
  Eigen::MatrixXd Z = X.rowwise() - model.feature_mean;
  if (standardize) {
    model.feature_scale =
        (Z.array().square().colwise().sum() / double(n)).sqrt();
    for (Eigen::Index j = 0; j < f; ++j) {
      if (model.feature_scale[j] == 0.0) model.feature_scale[j] = 1.0;
    }
    Z.array().rowwise() /= model.feature_scale.array();
  } else {
    model.feature_scale = Eigen::RowVectorXd::Ones(f);
  }

  const Eigen::RowVectorXd y_mean = Y.colwise().mean();
  const Eigen::MatrixXd Yc = Y.rowwise() - y_mean;

  Eigen::MatrixXd gram = Z.transpose() * Z;
  gram.diagonal().array() += lambda;
  model.weights = gram.ldlt().solve(Z.transpose() * Yc);
  model.intercept = y_mean;
  return model;
}

Eigen::MatrixXd ridge_predict(const RidgeModel& model,
                              const Eigen::MatrixXd& X) {
  Eigen::MatrixXd Z = X.rowwise() - model.feature_mean;
  Z.array().rowwise() /= model.feature_scale.array();
  Eigen::MatrixXd pred = Z * model.weights;
  pred.rowwise() += model.intercept;
  return pred;
}

double pearson_r(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) {
    throw ShapeMismatchError("pearson_r: length mismatch");
  }
  if (x.size() < 2) {
    throw TooFewSamplesError("pearson_r needs >= 2 samples");
  }
  const Eigen::ArrayXd xc = x.array() - x.mean();
  const Eigen::ArrayXd yc = y.array() - y.mean();
  const double sx = std::sqrt(xc.square().sum());
  const double sy = std::sqrt(yc.square().sum());
  if (sx == 0.0 || sy == 0.0) {
    throw ConstantVectorError("pearson_r: constant input vector");
  }
  return (xc * yc).sum() / (sx * sy);
}

namespace {

// Deterministic fold assignment: a seeded permutation of keys (stimulus
// indices or group labels) dealt into n_splits contiguous chunks.
template <typename T>
std::vector<std::vector<T>> deal_folds(std::vector<T> keys, int n_splits,
                                       std::uint64_t seed) {
  Rng rng(seed);
  rng.shuffle(keys);
  std::vector<std::vector<T>> folds(static_cast<std::size_t>(n_splits));
  const std::size_t n = keys.size();
  for (std::size_t i = 0, start = 0; i < folds.size(); ++i) {
    const std::size_t count = n / folds.size() + (i < n % folds.size());
    folds[i].assign(keys.begin() + start, keys.begin() + start + count);
    start += count;
  }
  return folds;
}

struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
  std::vector<std::string> test_groups;
};

std::vector<Split> make_splits(const NeuralDataset& data,
                               const EncoderConfig& config) {
  const auto n = static_cast<Eigen::Index>(data.stimuli.size());
  std::vector<Split> splits;
  if (config.policy == SplitPolicy::grouped) {
    if (data.group_ids.empty()) {
      throw ConfigError("grouped policy requires group_ids");
    }
    std::vector<std::string> labels(data.group_ids.begin(),
                                    data.group_ids.end());
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    if (static_cast<int>(labels.size()) < config.n_splits) {
      throw TooFewStimuliError("fewer groups than splits");
    }
    const auto folds = deal_folds(labels, config.n_splits, config.seed);
    for (const auto& fold : folds) {
      Split s;
      const std::set<std::string> test_set(fold.begin(), fold.end());
      for (Eigen::Index i = 0; i < n; ++i) {
        if (test_set.count(data.group_ids[static_cast<std::size_t>(i)])) {
          s.test.push_back(i);
        } else {
          s.train.push_back(i);
        }
      }
      s.test_groups = fold;
      std::sort(s.test_groups.begin(), s.test_groups.end());
      splits.push_back(std::move(s));
    }
    // zero-leak assertion: no train row may carry a test group label
    for (const auto& s : splits) {
      const std::set<std::string> test_set(s.test_groups.begin(),
                                           s.test_groups.end());
      for (const auto i : s.train) {
        if (test_set.count(data.group_ids[static_cast<std::size_t>(i)])) {
          throw GroupLeakError("group appears in both train and test");
        }
      }
    }
  } else {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    const auto folds = deal_folds(idx, config.n_splits, config.seed);
    for (const auto& fold : folds) {
      Split s;
      const std::set<Eigen::Index> test_set(fold.begin(), fold.end());
      for (Eigen::Index i = 0; i < n; ++i) {
        (test_set.count(i) ? s.test : s.train).push_back(i);
      }
      splits.push_back(std::move(s));
    }
  }
  for (const auto& s : splits) {
    if (s.train.size() < 2 || s.test.size() < 2) {
      throw TooFewStimuliError("split leaves fewer than 2 train/test rows");
    }
  }
  return splits;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m,
                          const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  }
  return out;
}

double mean_target_r(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& y) {
  double sum = 0.0;
  for (Eigen::Index t = 0; t < y.cols(); ++t) {
    sum += pearson_r(pred.col(t), y.col(t));
  }
  return sum / double(y.cols());
}

}  // namespace

AlignmentResult cv_alignment(const ActivationMatrix& features,
                             const UnitSet& units, const NeuralDataset& data,
                             const EncoderConfig& config) {
  features.validate();
  data.validate();
  if (units.empty()) throw EmptyUnitSetError("cv_alignment: no units");
  if (config.lambda_grid.empty()) throw ConfigError("empty lambda grid");
  if (features.n_stimuli() != static_cast<Eigen::Index>(data.stimuli.size())) {
    throw ShapeMismatchError(
        "feature rows do not align with dataset stimuli");
  }

  // restrict features to the unit subset
  Eigen::MatrixXd X(features.n_stimuli(),
                    static_cast<Eigen::Index>(units.size()));
  {
    Eigen::Index c = 0;
    for (const auto& u : units) {
      X.col(c++) =
          features.values.col(u.flat(features.geometry)).cast<double>();
    }
  }
  const Eigen::MatrixXd Y = data.responses.cast<double>();

  const auto splits = make_splits(data, config);
  AlignmentResult result;
  double total = 0.0;
  for (std::size_t si = 0; si < splits.size(); ++si) {
    const auto& split = splits[si];
    const Eigen::MatrixXd x_train = take_rows(X, split.train);
    const Eigen::MatrixXd y_train = take_rows(Y, split.train);

    // inner split of the training rows for lambda selection
    const auto n_train = static_cast<std::size_t>(x_train.rows());
    auto n_val = static_cast<std::size_t>(
        std::floor(config.inner_val_fraction * double(n_train)));
    n_val = std::max<std::size_t>(n_val, 2);
    Rng inner_rng(config.seed * 1000003u + si);
    std::vector<Eigen::Index> order(n_train);
    std::iota(order.begin(), order.end(), 0);
    inner_rng.shuffle(order);
    const std::vector<Eigen::Index> val_rows(order.begin(),
                                             order.begin() + n_val);
    const std::vector<Eigen::Index> fit_rows(order.begin() + n_val,
                                             order.end());
    const Eigen::MatrixXd x_fit = take_rows(x_train, fit_rows);
    const Eigen::MatrixXd y_fit = take_rows(y_train, fit_rows);
    const Eigen::MatrixXd x_val = take_rows(x_train, val_rows);
    const Eigen::MatrixXd y_val = take_rows(y_train, val_rows);

    double best_lambda = config.lambda_grid.front();
    double best_score = -2.0;
    for (const double lambda : config.lambda_grid) {
      const auto m =
          ridge_fit(x_fit, y_fit, lambda, config.standardize_features);
      const double score = mean_target_r(ridge_predict(m, x_val), y_val);
      if (score > best_score) {
        best_score = score;
        best_lambda = lambda;
      }
    }

    const auto m =
        ridge_fit(x_train, y_train, best_lambda, config.standardize_features);
    const double r =
        mean_target_r(ridge_predict(m, take_rows(X, split.test)),
                      take_rows(Y, split.test));
    result.split_mean_r.push_back(r);
    result.chosen_lambda.push_back(best_lambda);
    result.split_test_groups.push_back(split.test_groups);
    total += r;
  }
  result.mean_r = total / double(splits.size());
  return result;
}

std::vector<CurvePoint> alignment_curve(const ActivationMatrix& features,
                                        const SelectivityRanking& ranking,
                                        const NeuralDataset& data,
                                        const EncoderConfig& config,
                                        const std::vector<double>& percents,
                                        int n_random_seeds,
                                        std::uint64_t base_seed) {
  std::vector<CurvePoint> curve;
  const auto dispersion = [](const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double s = 0.0;
    for (const double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / double(v.size() - 1));
  };
  for (const double percent : percents) {
    const UnitSet selected = select_top_percent(ranking, percent);
    if (selected.empty()) {
      throw EmptyUnitSetError("percent " + std::to_string(percent) +
                              " selects zero units");
    }
    const auto sel = cv_alignment(features, selected, data, config);
    curve.push_back(CurvePoint{percent, "selected", std::nullopt,
                               selected.size(), sel.mean_r,
                               dispersion(sel.split_mean_r, sel.mean_r)});
    for (int s = 0; s < n_random_seeds; ++s) {
      const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(s);
      const UnitSet control =
          sample_random_control(selected, ranking.geometry, seed);
      const auto rnd = cv_alignment(features, control, data, config);
      curve.push_back(CurvePoint{percent, "random", seed, control.size(),
                                 rnd.mean_r,
                                 dispersion(rnd.split_mean_r, rnd.mean_r)});
    }
  }
  return curve;
}

ActivationMatrix make_synthetic_features(int n_stimuli,
                                         const ModelGeometry& g,
                                         std::uint64_t seed) {
  Rng rng(seed);
  ActivationMatrix acts;
  acts.geometry = g;
  acts.pooling = Pooling::last_token;
  acts.model_id = "synthetic";
  acts.values.resize(n_stimuli, g.unit_count());
  for (Eigen::Index i = 0; i < acts.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < acts.values.cols(); ++j) {
      acts.values(i, j) = static_cast<float>(rng.normal());
    }
  }
  acts.stimuli_sha256 = "synthetic-seed-" + std::to_string(seed);
  return acts;
}

NeuralDataset make_synthetic_neural_dataset(const ActivationMatrix& features,
                                            const UnitSet& planted_units,
                                            const SyntheticNeuralSpec& spec) {
  features.validate();
  if (planted_units.empty()) {
    throw EmptyUnitSetError("planted unit set is empty");
  }
  const Eigen::Index n = features.n_stimuli();
  const auto k = static_cast<Eigen::Index>(planted_units.size());
  Rng rng(spec.seed);

  Eigen::MatrixXd Xp(n, k);
  {
    Eigen::Index c = 0;
    for (const auto& u : planted_units) {
      Xp.col(c++) =
          features.values.col(u.flat(features.geometry)).cast<double>();
    }
  }
  NeuralDataset data;
  data.responses.resize(n, spec.n_targets);
  Eigen::VectorXd w(k);
  for (Eigen::Index t = 0; t < spec.n_targets; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) w[j] = rng.normal();
    Eigen::VectorXd signal = Xp * w;
    const double mean = signal.mean();
    const double sd = std::sqrt((signal.array() - mean).square().sum() /
                                double(n - 1));
    signal = (signal.array() - mean) / (sd > 0 ? sd : 1.0);
    const bool noiseless = !(spec.snr > 0.0) || std::isinf(spec.snr);
    const double noise_sd = noiseless ? 0.0 : std::sqrt(1.0 / spec.snr);
    for (Eigen::Index i = 0; i < n; ++i) {
      data.responses(i, t) = static_cast<float>(
          signal[i] + (noiseless ? 0.0 : noise_sd * rng.normal()));
    }
  }
  data.stimuli.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    data.stimuli.push_back("synthetic stimulus " + std::to_string(i));
  }
  if (spec.n_groups > 0) {
    // contiguous passage-like chunks
    for (Eigen::Index i = 0; i < n; ++i) {
      data.group_ids.push_back(
          "g" + std::to_string(i * spec.n_groups / n));
    }
  }
  if (!(spec.snr <= 0.0) && !std::isinf(spec.snr)) {
    data.noise_ceiling = std::sqrt(spec.snr / (1.0 + spec.snr));
  }
  data.validate();
  return data;
}

}  // namespace unitloc
