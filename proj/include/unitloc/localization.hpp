#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "unitloc/activation.hpp"
#include "unitloc/errors.hpp"
#include "unitloc/special.hpp"
#include "unitloc/units.hpp"

namespace unitloc {

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p_one_sided = 0.5;  // upper tail, P(T_df > t)
};

// Welch's unequal-variance t-test on two sample vectors (any Eigen
// expression). Both sides need at least two samples. When both sample
// variances are zero the statistic is 0 (equal means, p = 0.5) or +/-inf.
template <typename DerivedA, typename DerivedB>
WelchResult welch_t(const Eigen::DenseBase<DerivedA>& a,
                    const Eigen::DenseBase<DerivedB>& b) {
  const Eigen::Index na = a.size(), nb = b.size();
  if (na < 2 || nb < 2) {
    throw TooFewSamplesError("welch_t needs >= 2 samples per side");
  }
  const Eigen::ArrayXd xa = a.derived().template cast<double>().reshaped();
  const Eigen::ArrayXd xb = b.derived().template cast<double>().reshaped();
  const double ma = xa.mean(), mb = xb.mean();
  const double va = (xa - ma).square().sum() / double(na - 1);
  const double vb = (xb - mb).square().sum() / double(nb - 1);
  const double ra = va / double(na), rb = vb / double(nb);
  WelchResult r;
  if (ra + rb == 0.0) {
    r.df = double(na + nb - 2);
    if (ma == mb) {
      r.t = 0.0;
      r.p_one_sided = 0.5;
    } else {
      r.t = ma > mb ? std::numeric_limits<double>::infinity()
                    : -std::numeric_limits<double>::infinity();
      r.p_one_sided = ma > mb ? 0.0 : 1.0;
    }
    return r;
  }
  r.t = (ma - mb) / std::sqrt(ra + rb);
  r.df = (ra + rb) * (ra + rb) /
         (ra * ra / double(na - 1) + rb * rb / double(nb - 1));
  r.p_one_sided = student_t_sf(r.t, r.df);
  return r;
}

// Benjamini-Hochberg step-up; returns the rejection mask in input order.
Eigen::Array<bool, Eigen::Dynamic, 1> fdr_bh(const Eigen::ArrayXd& p_values,
                                             double alpha = 0.05);

struct UnitStat {
  UnitId unit;
  double t = 0.0;
  double df = 0.0;
  double p_one_sided = 0.5;
};

// Every unit in the universe exactly once, ordered by t descending with
// (layer, dim) ascending tie-break.
struct SelectivityRanking {
  ModelGeometry geometry;
  std::string model_id;
  std::vector<UnitStat> order;

  // Per-unit p values in flat unit order (layer*H + dim).
  Eigen::ArrayXd p_flat() const;
};

// Per-unit Welch t between condition A rows and condition B rows.
SelectivityRanking rank_units(const ActivationMatrix& cond_a,
                              const ActivationMatrix& cond_b);

// First floor(percent/100 * L*H) entries of the ranking.
UnitSet select_top_percent(const SelectivityRanking& ranking, double percent);

// Table 6-style count without materializing a ranking.
std::int64_t top_percent_count(const ModelGeometry& g, double percent);

// Per-layer sum of (1 - p) over globally FDR-significant units, divided by
// the hidden dimension.
std::vector<double> selectivity_index(const Eigen::ArrayXd& p_flat,
                                      const ModelGeometry& g,
                                      double alpha = 0.05);

// Percentage of the selected units falling in each layer; sums to 100.
std::vector<double> layer_distribution(const UnitSet& units,
                                       const ModelGeometry& g);

// Uniform sample, without replacement, of |selected| units from the
// complement of `selected` (the whole complement when fewer units remain);
// deterministic per seed.
UnitSet sample_random_control(const UnitSet& selected, const ModelGeometry& g,
                              std::uint64_t seed);

}  // namespace unitloc
