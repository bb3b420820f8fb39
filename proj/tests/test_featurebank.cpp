#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "helpers.hpp"
#include "tsfc/featurebank.hpp"

using namespace tsfc;
using namespace tsfc::featurebank;
using tsfc::testing::error_kind_of;

namespace {

enum Id : std::size_t {
  kMean, kStd, kSkew, kKurt, kMin, kMax, kMedian, kIqr, kQ25, kQ75, kSlope, kR2, kAcf1, kAcf2, kAcfBelow,
  kCrossing, kLongestAbove, kMeanAbsDiff, kOutlier, kCentroid, kEntropy, kDiffRatio
};

std::vector<double> random_window(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  double level = 0.0;
  for (auto& v : x) {
    level = 0.6 * level + rng.normal();
    v = level + 0.3 * std::sin(static_cast<double>(&v - x.data()));
  }
  return x;
}

// Biased autocorrelation straight from its definition.
double acf(const std::vector<double>& x, std::size_t lag) {
  const double n = static_cast<double>(x.size());
  double mu = 0.0;
  for (const double v : x) mu += v / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) den += (x[i] - mu) * (x[i] - mu);
  for (std::size_t i = 0; i + lag < x.size(); ++i) num += (x[i] - mu) * (x[i + lag] - mu);
  return num / den;
}

}  // namespace

TEST_SUITE("featurebank") {
  TEST_CASE("names are stable and unique") {
    const auto& names = feature_names();
    CHECK(names.size() == 22);
    CHECK(std::set<std::string_view>(names.begin(), names.end()).size() == 22);
    CHECK(names[0] == "mean");
    CHECK(names[kSlope] == "ols_slope");
    CHECK(names[kDiffRatio] == "diff_variance_ratio");
  }

  TEST_CASE("constant window uses the sentinels") {
    const auto f = compute_bank(std::vector<double>{5, 5, 5, 5});
    CHECK(f[kMean] == 5.0);
    CHECK(f[kStd] == 0.0);
    CHECK(f[kSlope] == 0.0);
    CHECK(f[kCrossing] == 0.0);
    CHECK(f[kDiffRatio] == 0.0);
    for (const double v : f) CHECK(std::isfinite(v));
  }

  TEST_CASE("ramp") {
    const auto f = compute_bank(std::vector<double>{0, 1, 2, 3});
    CHECK(f[kSlope] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f[kR2] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f[kMeanAbsDiff] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f[kMedian] == 1.5);
    CHECK(f[kQ25] == 0.75);
    CHECK(f[kQ75] == 2.25);
    CHECK(f[kIqr] == 1.5);
  }

  TEST_CASE("alternating window") {
    std::vector<double> x(64);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? -1.0 : 1.0;
    const auto f = compute_bank(x);
    CHECK(f[kAcf1] == doctest::Approx(-1.0).epsilon(0.02));
    CHECK(f[kAcf1] == doctest::Approx(-63.0 / 64.0).epsilon(1e-12));
    CHECK(f[kAcf2] == doctest::Approx(62.0 / 64.0).epsilon(1e-12));
    CHECK(f[kCrossing] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f[kAcfBelow] == doctest::Approx(1.0 / 64.0).epsilon(1e-12));
    CHECK(f[kLongestAbove] == doctest::Approx(1.0 / 64.0).epsilon(1e-12));
    CHECK(f[kCentroid] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(f[kEntropy] == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("acf columns agree with the direct definition") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const auto x = random_window(rng, static_cast<std::size_t>(rng.uniform_int(3, 80)));
      const auto f = compute_bank(x);
      CHECK(f[kAcf1] == doctest::Approx(acf(x, 1)).epsilon(1e-9));
      CHECK(f[kAcf2] == doctest::Approx(acf(x, 2)).epsilon(1e-9));
      CHECK(std::abs(f[kAcf1]) <= 1.0);
    }
  }

  TEST_CASE("pure tone spectral centroid") {
    // frequency 8/64 cycles per sample sits exactly on a periodogram bin
    std::vector<double> x(64);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * std::numbers::pi * 8.0 * static_cast<double>(i) / 64.0);
    const auto f = compute_bank(x);
    CHECK(f[kCentroid] == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(f[kEntropy] < 0.05);
  }

  TEST_CASE("location equivariance and shape invariance under affine maps") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
      const auto x = random_window(rng, static_cast<std::size_t>(rng.uniform_int(3, 120)));
      const double a = std::exp(rng.uniform(-3, 3));
      const double c = rng.uniform(-50, 50);
      std::vector<double> y(x.size()), z(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) {
        y[i] = x[i] + c;
        z[i] = a * x[i] + c;
      }
      const auto fx = compute_bank(x);
      const auto fy = compute_bank(y);
      const auto fz = compute_bank(z);
      for (const auto id : {kMean, kMin, kMax, kMedian, kQ25, kQ75})
        CHECK(fy[id] == doctest::Approx(fx[id] + c).epsilon(1e-9).scale(std::abs(c) + 1));
      for (const auto id : {kSkew, kKurt, kAcf1, kAcf2, kR2, kEntropy, kCrossing, kLongestAbove})
        CHECK(fz[id] == doctest::Approx(fx[id]).epsilon(1e-6).scale(1));
    }
  }

  TEST_CASE("outputs are finite for awkward inputs") {
    const std::vector<std::vector<double>> cases{
        {0, 0, 0},
        {1e300, -1e300, 1e300},
        {1e-300, 2e-300, 3e-300},
        {0, 0, 0, 0, 1},
        {7, 7, 7, 7, 7, 7, 7, 8},
        {-3, 4, -3, 4},
    };
    for (const auto& x : cases) {
      const auto f = compute_bank(x);
      for (const double v : f) CHECK(std::isfinite(v));
    }
    Rng rng(1);
    for (int trial = 0; trial < 200; ++trial) {
      auto x = random_window(rng, static_cast<std::size_t>(rng.uniform_int(3, 40)));
      if (rng.coin())
        for (auto& v : x) v = std::round(v);
      const auto f = compute_bank(x);
      for (const double v : f) CHECK(std::isfinite(v));
      CHECK(f[kEntropy] >= -1e-12);
      CHECK(f[kEntropy] <= 1.0 + 1e-12);
      CHECK(f[kOutlier] >= 0.0);
      CHECK(f[kOutlier] <= 1.0);
    }
  }

  TEST_CASE("short windows are rejected and evaluation is deterministic") {
    CHECK(error_kind_of([] { compute_bank(std::vector<double>{1, 2}); }) == ErrorKind::WindowTooShort);
    Rng rng(8);
    const auto x = random_window(rng, 33);
    CHECK(compute_bank(x) == compute_bank(x));
  }
}
