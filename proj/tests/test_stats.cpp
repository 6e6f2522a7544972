#include <doctest.h>

#include <Eigen/Core>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <vector>

#include "unitloc/localization.hpp"
#include "unitloc/rng.hpp"
#include "unitloc/special.hpp"

using namespace unitloc;

namespace {

Eigen::ArrayXd arr(std::initializer_list<double> v) {
  Eigen::ArrayXd a(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) a[i++] = x;
  return a;
}

// Independent route: direct textbook formulas, no shared code with the
// library implementation.
void reference_welch(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b,
                     double* t, double* df, double* p) {
  const double na = double(a.size()), nb = double(b.size());
  const double ma = a.sum() / na, mb = b.sum() / nb;
  const double va = (a - ma).square().sum() / (na - 1);
  const double vb = (b - mb).square().sum() / (nb - 1);
  *t = (ma - mb) / std::sqrt(va / na + vb / nb);
  *df = std::pow(va / na + vb / nb, 2) /
        (std::pow(va / na, 2) / (na - 1) + std::pow(vb / nb, 2) / (nb - 1));
  boost::math::students_t_distribution<double> dist(*df);
  *p = boost::math::cdf(boost::math::complement(dist, *t));
}

}  // namespace

TEST_CASE("student_t_sf matches reference values") {
  // frozen from an independent statistics package
  const struct {
    double t, df, sf;
  } cases[] = {
      {1.5491933384829668, 2.9411764705882355, 0.11044042024704787},
      {0.0, 5.0, 0.5},
      {2.5, 10.0, 0.015723422118304388},
      {-1.3, 3.7, 0.8656666379136864},
      {10.0, 2.0, 0.004926228511662846},
      {0.5, 100.3, 0.30908514269014264},
      {25.0, 300.0, 1.2398213559738753e-75},
      {-0.001, 2.1, 0.5003554797713015},
  };
  for (const auto& c : cases) {
    CAPTURE(c.t);
    CHECK(student_t_sf(c.t, c.df) ==
          doctest::Approx(c.sf).epsilon(1e-10));
  }
  CHECK(student_t_sf(std::numeric_limits<double>::infinity(), 3.0) == 0.0);
  CHECK(student_t_sf(-std::numeric_limits<double>::infinity(), 3.0) == 1.0);
}

TEST_CASE("student_t_sf tracks boost over a wide sweep") {
  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    const double t = -40.0 + 80.0 * rng.uniform01();
    const double df = 1.0 + 499.0 * rng.uniform01();
    boost::math::students_t_distribution<double> dist(df);
    const double want = boost::math::cdf(boost::math::complement(dist, t));
    const double got = student_t_sf(t, df);
    CHECK(std::fabs(got - want) <=
          1e-10 * std::max(1.0, std::fabs(want)));
  }
}

TEST_CASE("welch_t frozen examples") {
  // a = b: exact zero contrast
  const auto r0 = welch_t(arr({1, 2, 3}), arr({1, 2, 3}));
  CHECK(r0.t == 0.0);
  CHECK(r0.p_one_sided == doctest::Approx(0.5));

  // values frozen from an independent statistics package
  const auto r1 = welch_t(arr({2, 4, 6}), arr({1, 2, 3}));
  CHECK(r1.t == doctest::Approx(1.5491933384829668).epsilon(1e-12));
  CHECK(r1.df == doctest::Approx(2.9411764705882346).epsilon(1e-12));
  CHECK(r1.p_one_sided == doctest::Approx(0.1104404202470479).epsilon(1e-10));

  const auto r2 =
      welch_t(arr({1.0, 2.0, 3.0, 4.0}), arr({1.5, 1.5, 2.5, 3.5, 4.5}));
  CHECK(r2.t == doctest::Approx(-0.22992049957180444).epsilon(1e-12));
  CHECK(r2.df == doctest::Approx(6.598386546013316).epsilon(1e-12));
  CHECK(r2.p_one_sided ==
        doctest::Approx(0.5874412878731393).epsilon(1e-10));

  const auto r3 = welch_t(arr({10, 12, 9, 11, 13, 10.5}),
                          arr({10, 11, 9.5, 10.2}));
  CHECK(r3.t == doctest::Approx(1.121205622218367).epsilon(1e-12));
  CHECK(r3.df == doctest::Approx(7.2765135943677235).epsilon(1e-12));

  const auto r4 = welch_t(arr({-1, -2, -3}), arr({4, 5, 6, 7}));
  CHECK(r4.t == doctest::Approx(-8.660254037844387).epsilon(1e-12));
  CHECK(r4.p_one_sided ==
        doctest::Approx(0.9998232754335777).epsilon(1e-10));
}

TEST_CASE("welch_t matches the independent reference on 1000 random cases") {
  Rng rng(42);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto na = static_cast<Eigen::Index>(rng.uniform_int(2, 500));
    const auto nb = static_cast<Eigen::Index>(rng.uniform_int(2, 500));
    Eigen::ArrayXd a(na), b(nb);
    const double loc = 4.0 * rng.normal();
    const double scale_a = 0.1 + 3.0 * rng.uniform01();
    const double scale_b = 0.1 + 3.0 * rng.uniform01();
    for (auto& v : a) v = loc + scale_a * rng.normal();
    for (auto& v : b) v = scale_b * rng.normal();
    double t, df, p;
    reference_welch(a, b, &t, &df, &p);
    const auto got = welch_t(a, b);
    CHECK(std::fabs(got.t - t) < 1e-9);
    CHECK(std::fabs(got.df - df) < 1e-9);
    CHECK(std::fabs(got.p_one_sided - p) < 1e-9);
  }
}

TEST_CASE("welch_t antisymmetry under swap") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::ArrayXd a(5 + rep % 7), b(4 + rep % 5);
    for (auto& v : a) v = rng.normal();
    for (auto& v : b) v = 0.3 + rng.normal();
    const auto ab = welch_t(a, b);
    const auto ba = welch_t(b, a);
    CHECK(ab.t == doctest::Approx(-ba.t).epsilon(1e-14));
    CHECK(ab.df == doctest::Approx(ba.df).epsilon(1e-14));
    CHECK(ab.p_one_sided ==
          doctest::Approx(1.0 - ba.p_one_sided).epsilon(1e-9));
  }
}

TEST_CASE("welch_t degenerate inputs") {
  CHECK_THROWS_AS(welch_t(arr({1}), arr({1, 2})), TooFewSamplesError);
  // both variances zero, equal means: documented convention t=0, p=0.5
  const auto eq = welch_t(arr({2, 2, 2}), arr({2, 2}));
  CHECK(eq.t == 0.0);
  CHECK(eq.p_one_sided == 0.5);
  // both variances zero, different means
  const auto gt = welch_t(arr({3, 3}), arr({1, 1}));
  CHECK(std::isinf(gt.t));
  CHECK(gt.t > 0);
  CHECK(gt.p_one_sided == 0.0);
}

TEST_CASE("welch_t scale covariance") {
  Rng rng(11);
  Eigen::ArrayXd a(40), b(30);
  for (auto& v : a) v = 1.0 + rng.normal();
  for (auto& v : b) v = rng.normal();
  const auto base = welch_t(a, b);
  for (const double c : {0.001, 0.5, 7.0, 1234.5}) {
    const auto scaled = welch_t((c * a).eval(), (c * b).eval());
    CHECK(scaled.t == doctest::Approx(base.t).epsilon(1e-12));
    CHECK(scaled.df == doctest::Approx(base.df).epsilon(1e-12));
  }
}

namespace {

// Naive O(m^2) step-up: for each hypothesis, reject if there exists a rank
// k with p_(k) <= k*alpha/m and p_i <= p_(k).
std::vector<bool> naive_fdr(const std::vector<double>& p, double alpha) {
  const std::size_t m = p.size();
  std::vector<double> sorted(p);
  std::sort(sorted.begin(), sorted.end());
  double threshold = -1.0;
  for (std::size_t k = m; k >= 1; --k) {
    if (sorted[k - 1] <= double(k) * alpha / double(m)) {
      threshold = sorted[k - 1];
      break;
    }
  }
  std::vector<bool> mask(m, false);
  for (std::size_t i = 0; i < m; ++i) mask[i] = p[i] <= threshold;
  return mask;
}

}  // namespace

TEST_CASE("fdr_bh worked example and edge cases") {
  Eigen::ArrayXd p(4);
  p << 0.01, 0.02, 0.04, 0.5;
  const auto mask = fdr_bh(p, 0.05);
  CHECK(mask[0]);
  CHECK(mask[1]);
  CHECK_FALSE(mask[2]);
  CHECK_FALSE(mask[3]);

  const auto all_zero = fdr_bh(Eigen::ArrayXd::Zero(5), 0.05);
  for (int i = 0; i < 5; ++i) CHECK(all_zero[i]);
  const auto all_one = fdr_bh(Eigen::ArrayXd::Ones(5), 0.05);
  for (int i = 0; i < 5; ++i) CHECK_FALSE(all_one[i]);

  Eigen::ArrayXd bad(2);
  bad << 0.5, 1.5;
  CHECK_THROWS_AS(fdr_bh(bad, 0.05), InvalidPError);
}

TEST_CASE("fdr_bh matches the naive oracle on 1000 random vectors") {
  Rng rng(2024);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto m = static_cast<Eigen::Index>(rng.uniform_int(1, 60));
    Eigen::ArrayXd p(m);
    std::vector<double> pv(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      double v = rng.uniform01();
      if (rng.below(4) == 0) v *= 0.05;  // make rejections likely
      if (rng.below(16) == 0) v = rng.below(2) ? 0.0 : 1.0;
      p[i] = v;
      pv[static_cast<std::size_t>(i)] = v;
    }
    const double alpha = 0.01 + 0.2 * rng.uniform01();
    const auto got = fdr_bh(p, alpha);
    const auto want = naive_fdr(pv, alpha);
    for (Eigen::Index i = 0; i < m; ++i) {
      CAPTURE(rep);
      CHECK(got[i] == want[static_cast<std::size_t>(i)]);
    }
  }
}
