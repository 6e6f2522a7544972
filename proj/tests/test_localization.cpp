#include <doctest.h>

#include <map>
#include <set>

#include "unitloc/localization.hpp"
#include "unitloc/rng.hpp"

using namespace unitloc;

namespace {

ActivationMatrix make_acts(const MatrixXfRM& values, const ModelGeometry& g,
                           const std::string& model_id = "toy") {
  ActivationMatrix m;
  m.values = values;
  m.geometry = g;
  m.model_id = model_id;
  m.stimuli_sha256 = "test";
  return m;
}

}  // namespace

TEST_CASE("rank_units orders by t with deterministic tie-break") {
  const ModelGeometry g{1, 3};
  // unit 0: strong positive contrast; unit 1: none; unit 2: negative
  MatrixXfRM a(4, 3), b(4, 3);
  a << 5.0f, 1.0f, 0.0f,
       5.1f, 1.1f, 0.1f,
       4.9f, 0.9f, 0.2f,
       5.0f, 1.0f, 0.1f;
  b << 0.0f, 1.0f, 3.0f,
       0.1f, 1.1f, 3.1f,
       0.2f, 0.9f, 2.9f,
       0.1f, 1.0f, 3.0f;
  const auto ranking = rank_units(make_acts(a, g), make_acts(b, g));
  REQUIRE(ranking.order.size() == 3);
  CHECK(ranking.order[0].unit == UnitId{0, 0});
  CHECK(ranking.order[1].unit == UnitId{0, 1});
  CHECK(ranking.order[2].unit == UnitId{0, 2});
  CHECK(ranking.order[0].t > 0);
  CHECK(ranking.order[2].t < 0);

  // hand-computed per-column welch values must agree
  for (int u = 0; u < 3; ++u) {
    const auto w = welch_t(a.col(u), b.col(u));
    bool found = false;
    for (const auto& s : ranking.order) {
      if (s.unit.flat(g) == u) {
        CHECK(s.t == doctest::Approx(w.t));
        CHECK(s.df == doctest::Approx(w.df));
        found = true;
      }
    }
    CHECK(found);
  }
}

TEST_CASE("rank_units on identical matrices ties to (layer, dim) order") {
  const ModelGeometry g{2, 2};
  MatrixXfRM a(3, 4);
  a << 1, 2, 3, 4, 1.5f, 2.5f, 3.5f, 4.5f, 0.5f, 1.5f, 2.5f, 3.5f;
  const auto ranking = rank_units(make_acts(a, g), make_acts(a, g));
  for (std::size_t i = 0; i < ranking.order.size(); ++i) {
    CHECK(ranking.order[i].t == 0.0);
    CHECK(ranking.order[i].unit ==
          UnitId::from_flat(static_cast<std::int64_t>(i), g));
  }
}

TEST_CASE("rank_units rejects mismatched universes") {
  MatrixXfRM a(3, 4), b(3, 6);
  a.setZero();
  b.setZero();
  CHECK_THROWS_AS(
      rank_units(make_acts(a, ModelGeometry{2, 2}),
                 make_acts(b, ModelGeometry{2, 3})),
      ShapeMismatchError);
}

TEST_CASE("select_top_percent floor arithmetic and nesting") {
  const ModelGeometry gpt2_large{36, 1280};
  CHECK(top_percent_count(gpt2_large, 1.0) == 460);
  CHECK(top_percent_count(gpt2_large, 0.03125) == 14);
  CHECK(top_percent_count(ModelGeometry{40, 5120}, 1.0) == 2048);
  CHECK(top_percent_count(ModelGeometry{32, 4544}, 0.03125) == 45);
  CHECK_THROWS_AS(top_percent_count(gpt2_large, 0.0), PercentOutOfRangeError);
  CHECK_THROWS_AS(top_percent_count(gpt2_large, 101.0),
                  PercentOutOfRangeError);

  // nesting of top-k sets on a synthetic ranking
  const ModelGeometry g{4, 50};
  SelectivityRanking ranking;
  ranking.geometry = g;
  std::vector<std::int64_t> perm(static_cast<std::size_t>(g.unit_count()));
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(5);
  std::vector<std::int64_t> shuffled = perm;
  rng.shuffle(shuffled);
  for (const auto u : shuffled) {
    ranking.order.push_back(
        UnitStat{UnitId::from_flat(u, g), double(perm.size()) -
                                              double(ranking.order.size()),
                 10.0, 0.1});
  }
  UnitSet prev;
  for (const double pct : {0.5, 1.0, 5.0, 25.0, 100.0}) {
    const auto sel = select_top_percent(ranking, pct);
    for (const auto& u : prev) CHECK(sel.contains(u));
    prev = sel;
  }
  CHECK(prev.size() == static_cast<std::size_t>(g.unit_count()));

  // floor to zero units -> empty set
  const auto none = select_top_percent(ranking, 0.01);
  CHECK(none.empty());
}

TEST_CASE("selectivity_index hand cases") {
  const ModelGeometry g{2, 4};
  Eigen::ArrayXd p(8);
  // layer 0: two tiny p (significant), layer 1: all large
  p << 0.001, 0.002, 0.9, 0.8, 0.7, 0.6, 0.9, 0.95;
  const auto idx = selectivity_index(p, g, 0.05);
  REQUIRE(idx.size() == 2);
  CHECK(idx[0] == doctest::Approx((0.999 + 0.998) / 4.0));
  CHECK(idx[1] == 0.0);

  // saturation: all significant with p = 0 gives index 1
  const auto idx2 = selectivity_index(Eigen::ArrayXd::Zero(8), g, 0.05);
  CHECK(idx2[0] == doctest::Approx(1.0));
  CHECK(idx2[1] == doctest::Approx(1.0));

  // specification example: H=4, significant p = {0.01, 0.02}
  // over a single layer, others non-significant
  const ModelGeometry g1{1, 4};
  Eigen::ArrayXd p1(4);
  p1 << 0.01, 0.02, 0.9, 0.95;
  const auto idx3 = selectivity_index(p1, g1, 0.05);
  CHECK(idx3[0] == doctest::Approx((0.99 + 0.98) / 4.0));  // 0.4925
}

TEST_CASE("layer_distribution counting") {
  const ModelGeometry g{2, 16};
  std::vector<UnitId> units;
  for (int d = 0; d < 7; ++d) units.push_back(UnitId{0, d});
  for (int d = 0; d < 3; ++d) units.push_back(UnitId{1, d});
  const auto dist = layer_distribution(UnitSet::from_units(units, g), g);
  REQUIRE(dist.size() == 2);
  CHECK(dist[0] == doctest::Approx(70.0));
  CHECK(dist[1] == doctest::Approx(30.0));

  std::vector<UnitId> only0;
  for (int d = 0; d < 5; ++d) only0.push_back(UnitId{0, d});
  const auto dist0 = layer_distribution(UnitSet::from_units(only0, g), g);
  CHECK(dist0[0] == doctest::Approx(100.0));
  CHECK(dist0[1] == 0.0);

  CHECK_THROWS_AS(layer_distribution(UnitSet{}, g), EmptyUnitSetError);
}

TEST_CASE("sample_random_control determinism and disjointness") {
  const ModelGeometry g{4, 32};
  std::vector<UnitId> sel;
  for (int d = 0; d < 20; ++d) sel.push_back(UnitId{1, d});
  const auto selected = UnitSet::from_units(sel, g);

  const auto c1 = sample_random_control(selected, g, 99);
  const auto c2 = sample_random_control(selected, g, 99);
  const auto c3 = sample_random_control(selected, g, 100);
  CHECK(c1.units() == c2.units());
  CHECK(c1.units() != c3.units());
  CHECK(c1.size() == selected.size());
  CHECK_FALSE(c1.intersects(selected));
}

TEST_CASE("sample_random_control forced complement") {
  const ModelGeometry g{1, 10};
  std::vector<UnitId> sel;
  for (int d = 0; d < 9; ++d) sel.push_back(UnitId{0, d});
  const auto control =
      sample_random_control(UnitSet::from_units(sel, g), g, 0);
  REQUIRE(control.size() == 1);
  CHECK(control.units()[0] == UnitId{0, 9});

  std::vector<UnitId> all;
  for (int d = 0; d < 10; ++d) all.push_back(UnitId{0, d});
  CHECK_THROWS_AS(
      sample_random_control(UnitSet::from_units(all, g), g, 0),
      UniverseTooSmallError);
}

TEST_CASE("sample_random_control chi-square uniformity over the complement") {
  // 100-unit universe, 20 selected; inclusion counts of the 80 complement
  // units over many draws should be uniform.
  const ModelGeometry g{10, 10};
  std::vector<UnitId> sel;
  for (int d = 0; d < 20; ++d) sel.push_back(UnitId::from_flat(d, g));
  const auto selected = UnitSet::from_units(sel, g);

  std::map<std::int64_t, int> counts;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) {
    const auto control =
        sample_random_control(selected, g, static_cast<std::uint64_t>(s));
    for (const auto& u : control) counts[u.flat(g)] += 1;
  }
  CHECK(counts.size() == 80);
  const double expected = double(draws) * 20.0 / 80.0;
  double chi2 = 0.0;
  for (const auto& [unit, n] : counts) {
    CHECK(unit >= 20);  // never from the selected set
    chi2 += (n - expected) * (n - expected) / expected;
  }
  // chi-square critical value at alpha=0.01, df=79 (frozen from an
  // independent statistics package)
  CHECK(chi2 < 111.14401942288376);
}
