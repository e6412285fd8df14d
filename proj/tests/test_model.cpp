#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "ssmprune/energy.hpp"
#include "ssmprune/linalg.hpp"
#include "ssmprune/model.hpp"

using namespace ssmprune;

namespace {

DiagonalLayer continuous_scalar(cdouble lambda, double delta, cdouble b) {
  DiagonalLayer layer = oracle::scalar_layer(lambda, b, 1.0);
  layer.time_domain = TimeDomain::continuous;
  layer.delta = RVector::Constant(1, delta);
  return layer;
}

DiagonalLayer two_zero_modes() {
  DiagonalLayer layer;
  layer.name = "pair";
  layer.lambda = CVector::Zero(2);
  layer.B = CMatrix::Ones(2, 1);
  layer.C = CMatrix::Ones(1, 2);
  return layer;
}

}  // namespace

TEST_CASE("validate_layer reports boundary violations") {
  CHECK(validate_layer(oracle::scalar_layer(0.5, 1.0, 1.0)).empty());

  auto v = validate_layer(oracle::scalar_layer(1.0, 1.0, 1.0));
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("pole magnitude >= 1 at index 0") != std::string::npos);

  auto c = continuous_scalar({0.1, 2.0}, 1.0, 1.0);
  auto vc = validate_layer(c);
  REQUIRE(vc.size() == 1);
  CHECK(vc[0].find("Re(lambda) >= 0 at index 0") != std::string::npos);
}

TEST_CASE("validate_layer catches shapes, non-finite entries and missing delta") {
  auto layer = oracle::scalar_layer(0.5, 1.0, 1.0);
  layer.B(0, 0) = std::nan("");
  auto v = validate_layer(layer);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("B") != std::string::npos);
  CHECK(v[0].find("(0, 0)") != std::string::npos);

  auto bad_shape = two_zero_modes();
  bad_shape.C = CMatrix::Ones(1, 3);
  CHECK_FALSE(validate_layer(bad_shape).empty());

  auto no_delta = continuous_scalar(-1.0, 1.0, 1.0);
  no_delta.delta.reset();
  CHECK_FALSE(validate_layer(no_delta).empty());

  ModelStack stack;
  stack.layers = {two_zero_modes(), two_zero_modes()};
  CHECK_FALSE(validate_stack(stack).empty());
  CHECK_THROWS_AS(require_valid(stack), ValidationError);
  stack.layers.clear();
  CHECK_FALSE(validate_stack(stack).empty());
}

TEST_CASE("discretize_zoh examples") {
  auto d = discretize_zoh(continuous_scalar(-1.0, 1.0, 1.0));
  CHECK(d.time_domain == TimeDomain::discrete);
  CHECK(std::abs(d.lambda(0) - std::exp(-1.0)) < 1e-15);
  CHECK(d.lambda(0).real() == doctest::Approx(0.367879).epsilon(1e-6));
  CHECK(d.B(0, 0).real() == doctest::Approx(0.632121).epsilon(1e-6));
  CHECK(std::abs(d.B(0, 0) - (1.0 - std::exp(-1.0))) < 1e-15);

  auto d2 = discretize_zoh(continuous_scalar(-1.0, 0.1, 1.0));
  CHECK(d2.lambda(0).real() == doctest::Approx(0.904837).epsilon(1e-6));

  auto d3 = discretize_zoh(continuous_scalar(-1e-14, 0.1, 2.0));
  CHECK(std::abs(d3.B(0, 0) - cdouble(0.2)) < 1e-15);
}

TEST_CASE("discretize_zoh rejects non-Hurwitz input and missing delta") {
  CHECK_THROWS_AS(discretize_zoh(continuous_scalar(0.5, 1.0, 1.0)), ValidationError);
  auto no_delta = continuous_scalar(-1.0, 1.0, 1.0);
  no_delta.delta.reset();
  CHECK_THROWS_AS(discretize_zoh(no_delta), ValidationError);
}

TEST_CASE("stability closure over random Hurwitz poles") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> re(-50.0, -1e-9), im(-100.0, 100.0), ld(-4.0, 0.0);
  int violations = 0;
  for (int k = 0; k < 10000; ++k) {
    auto layer = continuous_scalar({re(rng), im(rng)}, std::pow(10.0, ld(rng)), 1.0);
    auto d = discretize_zoh(layer);
    if (!(std::abs(d.lambda(0)) < 1.0)) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("impulse_response examples") {
  auto h = impulse_response(oracle::scalar_layer(0.0, 2.0, 3.0), 2);
  REQUIRE(h.size() == 2);
  CHECK(h[0].H(0, 0) == cdouble(6.0));
  CHECK(h[1].H(0, 0) == cdouble(0.0));

  auto g = impulse_response(oracle::scalar_layer(0.5, 1.0, 1.0), 3);
  CHECK(g[0].H(0, 0) == cdouble(1.0));
  CHECK(g[1].H(0, 0) == cdouble(0.5));
  CHECK(g[2].H(0, 0) == cdouble(0.25));
  CHECK(g[2].t == 2);

  auto p = impulse_response(two_zero_modes(), 1);
  CHECK(p[0].H(0, 0) == cdouble(2.0));
}

TEST_CASE("impulse_response matches dense matrix powers") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    auto layer = oracle::random_layer(rng, 1 + trial % 7, 1 + trial % 3);
    auto got = impulse_response(layer, 30);
    auto want = oracle::impulse(layer, 30);
    for (int t = 0; t < 30; ++t) {
      CHECK((got[t].H - want[t]).norm() <= 1e-12 * (1.0 + want[t].norm()));
    }
  }
}

TEST_CASE("frequency_response examples") {
  std::vector<double> zero{0.0}, pi{std::numbers::pi};
  CHECK(std::abs(frequency_response(oracle::scalar_layer(0.0, 1.0, 1.0), zero)[0](0, 0) -
                 cdouble(1.0)) < 1e-15);
  auto layer = oracle::scalar_layer(0.5, 1.0, 1.0);
  CHECK(std::abs(frequency_response(layer, zero)[0](0, 0) - cdouble(2.0)) < 1e-15);
  CHECK(std::abs(frequency_response(layer, pi)[0](0, 0) - cdouble(2.0 / 3.0)) < 1e-15);
}

TEST_CASE("frequency_response agrees with a dense resolvent") {
  std::mt19937_64 rng(17);
  auto layer = oracle::random_layer(rng, 6, 3);
  std::vector<double> w{0.0, 0.3, 1.7, 3.1, 5.9};
  auto got = frequency_response(layer, w);
  for (std::size_t k = 0; k < w.size(); ++k) {
    auto want = oracle::transfer(layer, w[k]);
    CHECK((got[k] - want).norm() <= 1e-10 * want.norm());
  }
}

TEST_CASE("simulate examples and alignment") {
  auto layer = oracle::scalar_layer(0.5, 1.0, 1.0);
  CMatrix u = CMatrix::Zero(5, 1);
  u(0, 0) = 1.0;
  auto rec = simulate(layer, u);
  auto conv = simulate_convolution(layer, u);
  CHECK(rec(0, 0) == cdouble(0.0));
  for (int k = 1; k < 5; ++k) {
    CHECK(rec(k, 0) == cdouble(std::pow(0.5, k - 1)));
    CHECK(conv(k - 1, 0) == rec(k, 0));
  }

  CMatrix zero = CMatrix::Zero(4, 1);
  auto free = simulate(layer, zero, CVector::Ones(1));
  CHECK(free(0, 0) == cdouble(1.0));
  CHECK(free(1, 0) == cdouble(0.5));
  CHECK(free(2, 0) == cdouble(0.25));

  std::mt19937_64 rng(3);
  auto silent = oracle::random_layer(rng, 4, 2);
  silent.B.setZero();
  CMatrix noise = CMatrix::Random(16, 2);
  CHECK(simulate(silent, noise).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("simulate rejects shape mismatch") {
  auto layer = oracle::scalar_layer(0.5, 1.0, 1.0);
  CHECK_THROWS(simulate(layer, CMatrix::Zero(3, 2)));
  CHECK_THROWS(simulate(layer, CMatrix::Zero(3, 1), CVector::Zero(2)));
}

TEST_CASE("convolution consistency on random inputs") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 32);
    const int h = 1 + static_cast<int>(rng() % 4);
    const int T = 1 + static_cast<int>(rng() % 256);
    auto layer = oracle::random_layer(rng, n, h);
    CMatrix u(T, h);
    for (int r = 0; r < T; ++r) {
      for (int c = 0; c < h; ++c) u(r, c) = oracle::cnormal(rng);
    }
    auto rec = simulate(layer, u);
    auto conv = simulate_convolution(layer, u);
    CHECK(rec.row(0).norm() == 0.0);
    if (T > 1) {
      const CMatrix a = rec.bottomRows(T - 1);
      const CMatrix b = conv.topRows(T - 1);
      CHECK((a - b).norm() <= 1e-10 * b.norm());
    }
  }
}

TEST_CASE("rank-1 slice identity") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    auto layer = oracle::random_layer(rng, 3, 1 + trial % 5);
    const int i = trial % 3;
    const int t = trial % 40;
    const cdouble pw = std::pow(layer.lambda(i), t);
    const CMatrix slice = layer.C.col(i) * pw * layer.B.row(i);
    const double lhs = static_cast<double>(oracle::frob_sq(slice));
    const double rhs = std::pow(std::abs(layer.lambda(i)), 2 * t) * layer.C.col(i).squaredNorm() *
                       layer.B.row(i).squaredNorm();
    CHECK(oracle::rel_err(lhs, rhs) <= 1e-12);
  }
}

TEST_CASE("frequency/time consistency with tail bound") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    auto layer = oracle::random_layer(rng, 5, 2, 0.8);
    const int N = 128;
    double tail = 0.0;
    for (int i = 0; i < layer.n(); ++i) {
      const double r = std::abs(layer.lambda(i));
      const double alpha = layer.C.col(i).norm() * layer.B.row(i).norm();
      tail += alpha * std::pow(r, N) / (1.0 - r);
    }
    REQUIRE(tail < 1e-8);
    auto grid = uniform_frequency_grid(N);
    auto G = frequency_response(layer, grid);
    auto F = oracle::dft(oracle::impulse(layer, N), N);
    for (int k = 0; k < N; ++k) CHECK((G[k] - F[k]).norm() <= tail + 1e-12);
  }
}

TEST_CASE("select_modes and mask_modes") {
  std::mt19937_64 rng(37);
  auto layer = oracle::random_layer(rng, 4, 2);
  layer.C_bwd = layer.C * 2.0;
  std::vector<int> keep{2, 0};
  auto sub = select_modes(layer, keep);
  CHECK(sub.n() == 2);
  CHECK(sub.lambda(0) == layer.lambda(2));
  CHECK(sub.C_bwd->col(1) == layer.C_bwd->col(0));

  std::vector<int> drop{1};
  auto masked = mask_modes(layer, drop);
  CHECK(masked.n() == 4);
  CHECK(masked.B.row(1).norm() == 0.0);
  CHECK(masked.C.col(1).norm() == 0.0);
  CHECK(masked.C_bwd->col(1).norm() == 0.0);
  CHECK(masked.B.row(0) == layer.B.row(0));
}

TEST_CASE("expand_conjugate_pairs appends conjugates") {
  auto layer = oracle::scalar_layer({0.3, 0.4}, {1.0, 2.0}, {0.5, -1.0});
  layer.conjugate_pairs = true;
  auto full = expand_conjugate_pairs(layer);
  CHECK(full.n() == 2);
  CHECK_FALSE(full.conjugate_pairs);
  CHECK(full.lambda(1) == std::conj(layer.lambda(0)));
  CHECK(full.B(1, 0) == std::conj(layer.B(0, 0)));
  auto h = impulse_response(full, 6);
  for (const auto& s : h) CHECK(std::abs(s.H(0, 0).imag()) < 1e-15);
}

TEST_CASE("time domain strings round-trip") {
  CHECK(time_domain_from_string(to_string(TimeDomain::continuous)) == TimeDomain::continuous);
  CHECK(time_domain_from_string("discrete") == TimeDomain::discrete);
  CHECK_THROWS(time_domain_from_string("hybrid"));
}
