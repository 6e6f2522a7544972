#include "unitloc/localization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "unitloc/rng.hpp"

namespace unitloc {

Eigen::Array<bool, Eigen::Dynamic, 1> fdr_bh(const Eigen::ArrayXd& p_values,
                                             double alpha) {
  const Eigen::Index m = p_values.size();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double p = p_values[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidPError("p-value out of [0,1]: " + std::to_string(p));
    }
  }
  Eigen::Array<bool, Eigen::Dynamic, 1> mask =
      Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(m, false);
  if (m == 0) return mask;

  std::vector<Eigen::Index> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return p_values[a] < p_values[b];
  });
  Eigen::Index k = -1;  // largest rank with p_(k) <= k/m * alpha
  for (Eigen::Index r = 0; r < m; ++r) {
    if (p_values[idx[r]] <= double(r + 1) / double(m) * alpha) k = r;
  }
  for (Eigen::Index r = 0; r <= k; ++r) mask[idx[r]] = true;
  return mask;
}

Eigen::ArrayXd SelectivityRanking::p_flat() const {
  Eigen::ArrayXd p(geometry.unit_count());
  for (const auto& s : order) p[s.unit.flat(geometry)] = s.p_one_sided;
  return p;
}

SelectivityRanking rank_units(const ActivationMatrix& cond_a,
                              const ActivationMatrix& cond_b) {
  cond_a.validate();
  cond_b.validate();
  if (cond_a.geometry != cond_b.geometry ||
      cond_a.model_id != cond_b.model_id) {
    throw ShapeMismatchError(
        "rank_units: condition matrices disagree on model/universe");
  }
  const ModelGeometry g = cond_a.geometry;
  SelectivityRanking ranking;
  ranking.geometry = g;
  ranking.model_id = cond_a.model_id;
  ranking.order.resize(static_cast<std::size_t>(g.unit_count()));
  for (std::int64_t u = 0; u < g.unit_count(); ++u) {
    const auto w = welch_t(cond_a.values.col(u), cond_b.values.col(u));
    ranking.order[u] = UnitStat{UnitId::from_flat(u, g), w.t, w.df,
                                w.p_one_sided};
  }
  std::stable_sort(ranking.order.begin(), ranking.order.end(),
                   [](const UnitStat& a, const UnitStat& b) {
                     if (a.t != b.t) return a.t > b.t;
                     return a.unit < b.unit;
                   });
  return ranking;
}

std::int64_t top_percent_count(const ModelGeometry& g, double percent) {
  if (!(percent > 0.0 && percent <= 100.0)) {
    throw PercentOutOfRangeError("percent must be in (0, 100]: " +
                                 std::to_string(percent));
  }
  return static_cast<std::int64_t>(
      std::floor(percent / 100.0 * static_cast<double>(g.unit_count())));
}

UnitSet select_top_percent(const SelectivityRanking& ranking, double percent) {
  const std::int64_t k = top_percent_count(ranking.geometry, percent);
  if (static_cast<std::int64_t>(ranking.order.size()) !=
      ranking.geometry.unit_count()) {
    throw ShapeMismatchError("ranking does not cover the unit universe");
  }
  std::vector<UnitId> units;
  units.reserve(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) {
    units.push_back(ranking.order[static_cast<std::size_t>(i)].unit);
  }
  return UnitSet::from_units(std::move(units), ranking.geometry);
}

std::vector<double> selectivity_index(const Eigen::ArrayXd& p_flat,
                                      const ModelGeometry& g, double alpha) {
  if (p_flat.size() != g.unit_count()) {
    throw ShapeMismatchError("selectivity_index: p vector size mismatch");
  }
  const auto significant = fdr_bh(p_flat, alpha);
  std::vector<double> index(static_cast<std::size_t>(g.n_layers), 0.0);
  for (std::int64_t u = 0; u < g.unit_count(); ++u) {
    if (significant[u]) {
      index[static_cast<std::size_t>(u / g.hidden_dim)] += 1.0 - p_flat[u];
    }
  }
  for (auto& v : index) v /= double(g.hidden_dim);
  return index;
}

std::vector<double> layer_distribution(const UnitSet& units,
                                       const ModelGeometry& g) {
  if (units.empty()) {
    throw EmptyUnitSetError("layer_distribution: empty unit set");
  }
  std::vector<double> dist(static_cast<std::size_t>(g.n_layers), 0.0);
  for (const auto& u : units) {
    dist[static_cast<std::size_t>(u.layer)] += 1.0;
  }
  for (auto& v : dist) v *= 100.0 / double(units.size());
  return dist;
}

UnitSet sample_random_control(const UnitSet& selected, const ModelGeometry& g,
                              std::uint64_t seed) {
  const std::int64_t universe = g.unit_count();
  std::int64_t k = static_cast<std::int64_t>(selected.size());
  if (k > 0 && universe - k == 0) {
    throw UniverseTooSmallError("selected set covers the whole universe");
  }
  // When fewer units remain than were selected, the control is the whole
  // complement (forced-complement case).
  k = std::min(k, universe - k);
  std::vector<std::int64_t> complement;
  complement.reserve(static_cast<std::size_t>(universe - k));
  auto it = selected.begin();
  for (std::int64_t u = 0; u < universe; ++u) {
    if (it != selected.end() && it->flat(g) == u) {
      ++it;
    } else {
      complement.push_back(u);
    }
  }
  Rng rng(seed);
  const auto idx = rng.sample_indices(complement.size(),
                                      static_cast<std::size_t>(k));
  std::vector<UnitId> units;
  units.reserve(idx.size());
  for (const auto i : idx) {
    units.push_back(UnitId::from_flat(complement[i], g));
  }
  return UnitSet::from_units(std::move(units), g);
}

}  // namespace unitloc
