#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "helpers.hpp"
#include "tsfc/kernels.hpp"

using namespace tsfc;
using namespace tsfc::kernels;
using tsfc::testing::error_kind_of;

namespace {

// Direct evaluation of the padded/unpadded dilated convolution definition.
std::vector<double> naive_convolve(const std::vector<double>& x, const Kernel& k) {
  const auto l = static_cast<long>(k.weights.size());
  const auto d = static_cast<long>(k.dilation);
  const auto m = static_cast<long>(x.size());
  const long span = (l - 1) * d;
  const long pad = k.padding ? span / 2 : 0;
  const long out_len = k.padding ? m : m - span;
  std::vector<double> out;
  for (long t = 0; t < out_len; ++t) {
    double s = 0.0;
    for (long j = 0; j < l; ++j) {
      const long idx = t - pad + j * d;
      if (idx >= 0 && idx < m) s += k.weights[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(idx)];
    }
    out.push_back(s - k.bias);
  }
  return out;
}

std::vector<double> random_series(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(m);
  for (auto& v : x) v = rng.normal();
  return x;
}

}  // namespace

TEST_SUITE("kernels") {
  TEST_CASE("dilated convolution hand examples") {
    CHECK(dilated_convolve(std::vector<double>{1, 2, 3}, Kernel{{1, -1}, 0.0, 1, false}) ==
          std::vector<double>{-1, -1});
    CHECK(dilated_convolve(std::vector<double>{4, 5, 6}, Kernel{{1}, 0.0, 1, false}) == std::vector<double>{4, 5, 6});
    CHECK(dilated_convolve(std::vector<double>{1, 2, 3, 4}, Kernel{{1, 1}, 0.0, 2, false}) ==
          std::vector<double>{4, 6});
    CHECK(error_kind_of([] { dilated_convolve(std::vector<double>{1, 2, 3}, Kernel{{1, 1, 1}, 0.0, 2, false}); }) ==
          ErrorKind::KernelTooLarge);
  }

  TEST_CASE("dilated convolution agrees with the direct definition") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const auto m = static_cast<std::size_t>(rng.uniform_int(5, 60));
      const auto x = random_series(m, static_cast<std::uint64_t>(trial));
      Kernel k;
      k.weights.resize(static_cast<std::size_t>(rng.uniform_int(1, 5)));
      for (auto& w : k.weights) w = rng.normal();
      k.bias = rng.uniform(-1, 1);
      k.padding = rng.coin();
      const auto max_d = std::max<std::size_t>(1, (m - 1) / std::max<std::size_t>(1, k.weights.size() - 1 + 1));
      k.dilation = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_d)));
      if (!k.padding && (k.weights.size() - 1) * k.dilation >= m) continue;
      const auto got = dilated_convolve(x, k);
      const auto want = naive_convolve(x, k);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
      if (k.padding) CHECK(got.size() == m);
    }
  }

  TEST_CASE("pooling operators") {
    CHECK(pool(std::vector<double>{1, -1, 3, -3}, Pooling::Ppv) == 0.5);
    CHECK(pool(std::vector<double>{-1, 2, 3, -1, 5}, Pooling::Lspv) == 2);
    CHECK(pool(std::vector<double>{-1, 2, -1, 4}, Pooling::Mipv) == doctest::Approx(2.0 / 3.0));
    CHECK(pool(std::vector<double>{-1, 2, -1, 4}, Pooling::Mpv) == 3.0);
    CHECK(pool(std::vector<double>{-1, -2}, Pooling::Mpv) == 0.0);
    CHECK(pool(std::vector<double>{-1, -2}, Pooling::Max) == -1.0);
    CHECK(pool(std::vector<double>{0, 0, 0}, Pooling::Ppv) == 0.0);
    CHECK(pool(std::vector<double>{5}, Pooling::Mipv) == 0.0);
    CHECK(pool(std::vector<double>{1, 2, 3}, Pooling::Mean) == 2.0);
    CHECK(error_kind_of([] { pool(std::vector<double>{}, Pooling::Ppv); }) == ErrorKind::EmptyActivations);
  }

  TEST_CASE("pooling ranges and bias monotonicity on random activations") {
    Rng rng(5);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<double> a(static_cast<std::size_t>(rng.uniform_int(1, 40)));
      for (auto& v : a) v = rng.normal();
      const double ppv = pool(a, Pooling::Ppv);
      const double mipv = pool(a, Pooling::Mipv);
      CHECK(ppv >= 0.0);
      CHECK(ppv <= 1.0);
      CHECK(mipv >= 0.0);
      CHECK(mipv <= 1.0);
      CHECK(pool(a, Pooling::Lspv) <= static_cast<double>(a.size()));
      CHECK(pool(a, Pooling::Mpv) >= 0.0);

      std::vector<double> neg(a.size());
      const double eps = rng.uniform(1e-9, 1.0);
      std::transform(a.begin(), a.end(), neg.begin(), [&](double v) { return -v - eps; });
      CHECK(ppv + pool(neg, Pooling::Ppv) <= 1.0);

      std::vector<double> shifted(a.size());
      const double delta = rng.uniform(0.0, 2.0);
      std::transform(a.begin(), a.end(), shifted.begin(), [&](double v) { return v - delta; });
      CHECK(pool(shifted, Pooling::Ppv) <= ppv);
    }
  }

  TEST_CASE("first difference") {
    CHECK(first_difference(std::vector<double>{1, 3, 6}) == std::vector<double>{2, 3});
    CHECK(first_difference(std::vector<double>{4, 4, 4}) == std::vector<double>{0, 0});
    const auto ramp = first_difference(std::vector<double>{0.5, 2.0, 3.5, 5.0});
    for (const double v : ramp) CHECK(v == 1.5);
    CHECK(error_kind_of([] { first_difference(std::vector<double>{1}); }) == ErrorKind::TooShort);
  }

  TEST_CASE("rocket kernels, widths and determinism") {
    const auto pair = synthesize(SynthKind::FreqTwoClass, 10, 128, 1);
    const auto r = Rocket::fit(128, 500, 42);
    CHECK(r.feature_count() == 1000);
    for (const auto& k : r.kernels()) {
      const auto l = k.weights.size();
      CHECK((l == 7 || l == 9 || l == 11));
      CHECK(std::accumulate(k.weights.begin(), k.weights.end(), 0.0) == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(k.bias >= -1.0);
      CHECK(k.bias <= 1.0);
      CHECK(k.dilation >= 1);
      CHECK((k.dilation & (k.dilation - 1)) == 0);
      CHECK((l - 1) * k.dilation <= 127);
    }
    const auto f1 = rocket_transform(pair.train, pair.test, 500, 42);
    const auto f2 = rocket_transform(pair.train, pair.test, 500, 42);
    CHECK(f1.cols() == 1000);
    CHECK(f1 == f2);
    for (std::size_t r_ = 0; r_ < f1.rows(); ++r_)
      for (std::size_t c = 0; c < f1.cols(); c += 2) {
        CHECK(f1.at(r_, c) >= 0.0);
        CHECK(f1.at(r_, c) <= 1.0);
      }
    CHECK_FALSE(f1 == rocket_transform(pair.train, pair.test, 500, 43));
  }

  TEST_CASE("fixed bank patterns") {
    const auto& pos = FixedKernelBank::beta_positions();
    CHECK(pos.size() == 84);
    std::set<std::array<std::size_t, 3>> unique(pos.begin(), pos.end());
    CHECK(unique.size() == 84);
    for (std::size_t p = 0; p < 84; ++p) {
      const auto w = FixedKernelBank::pattern_weights(p);
      CHECK(std::accumulate(w.begin(), w.end(), 0.0) == 0.0);
      CHECK(std::count(w.begin(), w.end(), 2.0) == 3);
      CHECK(std::count(w.begin(), w.end(), -1.0) == 6);
    }
  }

  TEST_CASE("fixed bank dilations sum to the per-pattern count") {
    for (const std::size_t m : {9, 17, 64, 128, 500, 2000})
      for (const std::size_t fpp : {1, 5, 11, 32, 40}) {
        const auto d = FixedKernelBank::fit_dilations(m, fpp);
        std::size_t total = 0;
        for (const auto& [dil, count] : d) {
          CHECK(dil >= 1);
          CHECK(count >= 1);
          total += count;
        }
        CHECK(total == fpp);
        for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i].first > d[i - 1].first);
      }
  }

  TEST_CASE("minirocket width, range and determinism") {
    const auto pair = synthesize(SynthKind::BumpLocation, 20, 128, 3);
    const auto a = minirocket_transform(pair.train, pair.test, 1000, 9);
    const auto b = minirocket_transform(pair.train, pair.test, 1000, 9);
    CHECK(a.cols() == 924);
    CHECK(a.rows() == pair.test.size());
    CHECK(a == b);
    for (const double v : a.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(minirocket_transform(pair.train, pair.test, 84, 9).cols() == 84);
    CHECK(minirocket_transform(pair.train, pair.test, 200, 9).cols() == 168);
    CHECK(error_kind_of([&] { minirocket_transform(pair.train, pair.test, 83, 9); }) == ErrorKind::BudgetTooSmall);
  }

  TEST_CASE("minirocket fitted state depends on train only") {
    const auto pair = synthesize(SynthKind::FreqTwoClass, 20, 64, 5);
    const auto other = synthesize(SynthKind::NoiseOnly, 20, 64, 6);
    const auto model = MiniRocket::fit(pair.train, 1000, 1);
    const auto before = model.bank();
    (void)model.transform(pair.test);
    (void)model.transform(other.test);
    CHECK(model.bank() == before);
    CHECK(MiniRocket::fit(pair.train, 1000, 1).bank() == before);
    CHECK(error_kind_of([&] { model.transform(synthesize(SynthKind::NoiseOnly, 2, 32, 1).test); }) ==
          ErrorKind::DimensionMismatch);
  }

  TEST_CASE("multirocket widths and the constant-series difference") {
    const auto pair = synthesize(SynthKind::FreqTwoClass, 10, 64, 2);
    const auto f6 = multirocket_transform(pair.train, pair.test, 125, 6, 3);
    CHECK(f6.cols() == 1008);
    CHECK(f6 == multirocket_transform(pair.train, pair.test, 125, 6, 3));
    CHECK(multirocket_transform(pair.train, pair.test, 125, 4, 3).cols() == 672);
    CHECK(error_kind_of([&] { multirocket_transform(pair.train, pair.test, 125, 5, 3); }) == ErrorKind::InvalidConfig);

    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (int i = 0; i < 6; ++i) {
      rows.emplace_back(32, static_cast<double>(i));
      labels.push_back(i % 2 ? "a" : "b");
    }
    const auto flat = testing::make_dataset(rows, labels);
    const auto f = multirocket_transform(flat, flat, 125, 6, 1);
    std::size_t checked = 0;
    for (std::size_t c = 0; c < f.cols(); ++c) {
      const auto& name = f.names()[c];
      if (name.find("_diff_") == std::string::npos || name.substr(name.size() - 4) != "_ppv") continue;
      for (std::size_t r = 0; r < f.rows(); ++r) CHECK(f.at(r, c) == 0.0);
      ++checked;
    }
    CHECK(checked == 84);
  }
}
