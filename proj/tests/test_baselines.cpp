#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "ssmprune/baselines.hpp"
#include "ssmprune/energy.hpp"

using namespace ssmprune;

namespace {

std::vector<double> sorted_normalized(const std::vector<double>& per_index) {
  auto v = per_index;
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

}  // namespace

TEST_CASE("magnitude_score examples") {
  CHECK(magnitude_score(oracle::scalar_layer(0.5, 1.0, 1.0), 0) == doctest::Approx(0.5));
  CHECK(magnitude_score(oracle::scalar_layer(0.0, 7.0, 9.0), 0) == 0.0);
  CHECK(magnitude_score(oracle::scalar_layer(0.9, 2.0, 3.0), 0) == doctest::Approx(5.4));
}

TEST_CASE("hinf_score examples") {
  CHECK(hinf_score(oracle::scalar_layer(0.5, 1.0, 1.0), 0) == doctest::Approx(4.0));
  CHECK(hinf_score(oracle::scalar_layer(0.0, 1.0, 1.0), 0) == doctest::Approx(1.0));
  CHECK(hinf_score(oracle::scalar_layer(0.9, 1.0, 1.0), 0) == doctest::Approx(100.0));
  CHECK_THROWS(hinf_score(oracle::scalar_layer(1.0, 1.0, 1.0), 0));
}

TEST_CASE("lamp_score examples") {
  // magnitude^2 = r^2 |B|^2 |C|^2 with r = 1/2 and |C|^2 = 4 * raw.
  auto make = [](const std::vector<double>& mag2) {
    DiagonalLayer layer;
    layer.name = "lamp";
    const int n = static_cast<int>(mag2.size());
    layer.lambda = CVector::Constant(n, 0.5);
    layer.B = CMatrix::Ones(n, 1);
    layer.C = CMatrix::Zero(1, n);
    for (int i = 0; i < n; ++i) layer.C(0, i) = std::sqrt(4.0 * mag2[i]);
    return layer;
  };
  auto s = lamp_score(make({4, 2, 1, 1}));
  CHECK(s[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(s[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
  CHECK(s[2] == doctest::Approx(1.0 / 7.0).epsilon(1e-9));
  CHECK(s[3] == doctest::Approx(1.0 / 8.0).epsilon(1e-9));

  CHECK(lamp_score(make({3}))[0] == doctest::Approx(1.0));

  auto eq = sorted_normalized(lamp_score(make({2, 2, 2})));
  CHECK(eq[0] == doctest::Approx(1.0));
  CHECK(eq[1] == doctest::Approx(0.5));
  CHECK(eq[2] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("last_score examples") {
  // hinf = |C|^2 for lambda = 0 and unit B.
  auto make = [](const std::vector<double>& raw) {
    DiagonalLayer layer;
    layer.name = "last";
    const int n = static_cast<int>(raw.size());
    layer.lambda = CVector::Zero(n);
    layer.B = CMatrix::Ones(n, 1);
    layer.C = CMatrix::Zero(1, n);
    for (int i = 0; i < n; ++i) layer.C(0, i) = std::sqrt(raw[i]);
    return layer;
  };
  auto a = sorted_normalized(last_score(make({4, 4})));
  CHECK(a[0] == doctest::Approx(1.0));
  CHECK(a[1] == doctest::Approx(0.5));
  CHECK(last_score(make({5}))[0] == doctest::Approx(1.0));
  auto b = last_score(make({8, 1}));
  CHECK(b[0] == doctest::Approx(1.0));
  CHECK(b[1] == doctest::Approx(1.0 / 9.0));
}

TEST_CASE("random_score determinism and spread") {
  std::mt19937_64 rng(71);
  auto layer = oracle::random_layer(rng, 16, 2);
  auto a = random_score(layer, 5);
  auto b = random_score(layer, 5);
  CHECK(a == b);
  for (double x : a) {
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
  int differing = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    if (descending_order(random_score(layer, seed)) != descending_order(random_score(layer, seed + 100))) {
      ++differing;
    }
  }
  CHECK(differing == 20);
  CHECK(random_score(layer, 5, 1) != a);

  auto single = oracle::scalar_layer(0.5, 1.0, 1.0);
  CHECK(random_score(single, 9).size() == 1);
  CHECK(descending_order(random_score(single, 9)) == std::vector<int>{0});
}

TEST_CASE("descending_order is stable on ties") {
  CHECK(descending_order({1, 3, 3, 2}) == std::vector<int>{1, 2, 3, 0});
  CHECK(descending_order({1, 1, 1}) == std::vector<int>{0, 1, 2});
}

TEST_CASE("prefix_normalize bookkeeping") {
  auto ls = prefix_normalize("x", {1, 4, 1, 2}, 1e-12);
  CHECK(ls.order == std::vector<int>{1, 3, 0, 2});
  CHECK(ls.prefix_sums == std::vector<double>{4, 6, 7, 8});
  CHECK(ls.normalized[0] == doctest::Approx(1.0));
  CHECK(ls.normalized[1] == doctest::Approx(1.0 / 3.0));
  CHECK(ls.normalized[2] == doctest::Approx(1.0 / 7.0));
  CHECK(ls.normalized[3] == doctest::Approx(1.0 / 8.0));
  CHECK(ls.ranks() == std::vector<int>{2, 0, 3, 1});
}

TEST_CASE("aire_score_table examples") {
  auto t = aire_score_table(oracle::energy_layer("a", {4, 2, 1, 1}), 1e-12);
  REQUIRE(t.layers.size() == 1);
  const std::vector<double> want{1, 1.0 / 3, 1.0 / 7, 1.0 / 8};
  for (int k = 0; k < 4; ++k) CHECK(std::abs(t.layers[0].normalized[k] - want[k]) <= 1e-9);

  auto single = aire_score_table(oracle::energy_layer("s", {2.5}), 1e-12);
  CHECK(single.layers[0].normalized[0] == doctest::Approx(1.0 / (1.0 + 1e-12 / 2.5)));

  ModelStack stack;
  stack.layers = {oracle::energy_layer("L1", {8, 1}), oracle::energy_layer("L2", {4, 4})};
  auto two = aire_score_table(stack);
  CHECK(two.layers[0].normalized[0] == doctest::Approx(1.0));
  CHECK(two.layers[0].normalized[1] == doctest::Approx(1.0 / 9.0));
  CHECK(two.layers[1].normalized[0] == doctest::Approx(1.0));
  CHECK(two.layers[1].normalized[1] == doctest::Approx(0.5));
  CHECK(two.layers[0].energy[0] == doctest::Approx(8.0));
}

TEST_CASE("prefix scores are non-increasing and prefix sums non-decreasing") {
  std::mt19937_64 rng(73);
  for (int trial = 0; trial < 200; ++trial) {
    ModelStack stack;
    stack.layers.push_back(oracle::random_layer(rng, 1 + trial % 20, 2));
    for (Method m : {Method::aire, Method::lamp, Method::last}) {
      auto t = score_table(stack, m, Scope::prefix);
      const auto& ls = t.layers[0];
      auto perm = ls.order;
      std::sort(perm.begin(), perm.end());
      for (int i = 0; i < ls.n; ++i) CHECK(perm[i] == i);
      for (int i = 1; i < ls.n; ++i) {
        CHECK(ls.normalized[i] <= ls.normalized[i - 1]);
        CHECK(ls.prefix_sums[i] >= ls.prefix_sums[i - 1]);
      }
    }
  }
}

TEST_CASE("scale covariance of raw and prefix scores") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 50; ++trial) {
    ModelStack a;
    a.layers.push_back(oracle::random_layer(rng, 10, 3));
    ModelStack b = a;
    const double c = 1.5 + trial * 0.1;
    b.layers[0].C *= c;
    for (Method m : {Method::aire, Method::last, Method::lamp}) {
      auto ta = score_table(a, m, Scope::prefix);
      auto tb = score_table(b, m, Scope::prefix);
      CHECK(ta.layers[0].order == tb.layers[0].order);
      for (int i = 0; i < 10; ++i) {
        CHECK(oracle::rel_err(tb.layers[0].raw[i], c * c * ta.layers[0].raw[i]) <=
              1e-12);
        CHECK(std::abs(tb.layers[0].normalized[i] - ta.layers[0].normalized[i]) <= 1e-12);
      }
    }
    for (int i = 0; i < 10; ++i) {
      CHECK(oracle::rel_err(magnitude_score(b.layers[0], i), c * magnitude_score(a.layers[0], i)) <=
            1e-12);
      CHECK(oracle::rel_err(hinf_score(b.layers[0], i), c * c * hinf_score(a.layers[0], i)) <=
            1e-12);
    }
  }
}

TEST_CASE("rankings agree when all poles share a magnitude") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    ModelStack stack;
    stack.layers.push_back(oracle::random_layer(rng, 12, 2));
    auto& layer = stack.layers[0];
    for (int i = 0; i < layer.n(); ++i) layer.lambda(i) *= 0.7 / std::abs(layer.lambda(i));
    auto aire = score_table(stack, Method::aire, Scope::global);
    auto hinf = score_table(stack, Method::hinf, Scope::global);
    auto mag = score_table(stack, Method::magnitude, Scope::global);
    CHECK(aire.layers[0].order == hinf.layers[0].order);
    CHECK(aire.layers[0].order == mag.layers[0].order);
  }
}

TEST_CASE("ranking divergence between energy and peak-gain scores") {
  // alpha^2 = 1 at |lambda| = 0.9 versus alpha^2 = 30 at |lambda| = 0.5.
  auto m1 = oracle::scalar_layer(0.9, 1.0, 1.0);
  auto m2 = oracle::scalar_layer(0.5, 1.0, std::sqrt(30.0));
  CHECK(hinf_score(m1, 0) == doctest::Approx(100.0));
  CHECK(hinf_score(m2, 0) == doctest::Approx(120.0));
  CHECK(mode_energy(m1, 0).E == doctest::Approx(5.263158).epsilon(1e-6));
  CHECK(mode_energy(m2, 0).E == doctest::Approx(40.0));

  auto m3 = oracle::scalar_layer(0.99, 1.0, 1.0);
  auto m4 = oracle::scalar_layer(0.5, 1.0, std::sqrt(150.0));
  CHECK(hinf_score(m3, 0) == doctest::Approx(10000.0));
  CHECK(hinf_score(m4, 0) == doctest::Approx(600.0));
  CHECK(mode_energy(m3, 0).E == doctest::Approx(50.251256).epsilon(1e-6));
  CHECK(mode_energy(m4, 0).E == doctest::Approx(200.0));
  CHECK(hinf_score(m3, 0) > hinf_score(m4, 0));
  CHECK(mode_energy(m3, 0).E < mode_energy(m4, 0).E);
}

TEST_CASE("method and scope compatibility") {
  CHECK(default_scope(Method::aire) == Scope::prefix);
  CHECK(default_scope(Method::hinf) == Scope::global);
  CHECK(default_scope(Method::random) == Scope::global);
  CHECK_THROWS_AS(check_compatible(Method::random, Scope::prefix), std::invalid_argument);
  CHECK_THROWS_AS(check_compatible(Method::lamp, Scope::global), std::invalid_argument);
  CHECK_NOTHROW(check_compatible(Method::aire, Scope::uniform));
  CHECK_NOTHROW(check_compatible(Method::magnitude, Scope::uniform));

  for (Method m : {Method::random, Method::magnitude, Method::lamp, Method::hinf, Method::last,
                   Method::aire}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  for (Scope s : {Scope::uniform, Scope::global, Scope::prefix}) {
    CHECK(scope_from_string(to_string(s)) == s);
  }
  CHECK_THROWS(method_from_string("obs"));
}

TEST_CASE("score tables carry provenance") {
  std::mt19937_64 rng(89);
  ModelStack stack;
  stack.layers.push_back(oracle::random_layer(rng, 5, 2));
  stack.layers.push_back(oracle::random_layer(rng, 3, 2));
  stack.layers[1].name = "other";
  auto t = score_table(stack, Method::random, Scope::global, 1e-9, 42);
  CHECK(t.seed == 42);
  CHECK(t.epsilon == 1e-9);
  CHECK(t.layers.size() == 2);
  CHECK(t.layers[1].n == 3);
  CHECK(t.layers[0].normalized.empty());
  CHECK(t.layers[0].raw == random_score(stack.layers[0], 42, 0));
  CHECK(t.layers[1].raw == random_score(stack.layers[1], 42, 1));
}
