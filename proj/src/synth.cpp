#include "ssmprune/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ssmprune/rng.hpp"

namespace ssmprune {

namespace {

cdouble complex_normal(Rng& rng) {
  const double re = rng.normal();
  const double im = rng.normal();
  return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
}

void check_options(const SynthOptions& o) {
  std::vector<std::string> bad;
  if (o.num_layers < 1) bad.push_back("num_layers must be >= 1");
  if (o.channels < 1) bad.push_back("channels must be >= 1");
  if (o.modes.empty() || (o.modes.size() != 1 && static_cast<int>(o.modes.size()) != o.num_layers)) {
    bad.push_back("modes needs one entry or one per layer");
  }
  for (int m : o.modes) {
    if (m < 1) bad.push_back("every layer needs at least one mode");
  }
  if (!(o.radius_min >= 0.0 && o.radius_min <= o.radius_max && o.radius_max < 1.0)) {
    bad.push_back("pole radius range must satisfy 0 <= min <= max < 1");
  }
  if (o.continuous && o.radius_min <= 0.0) {
    bad.push_back("continuous synthesis needs radius_min > 0");
  }
  if (!(o.coupling_spread >= 0.0)) bad.push_back("coupling_spread must be nonnegative");
  if (o.structure == Structure::multi_siso) {
    if (o.conjugate_pairs) bad.push_back("multi_siso fixtures cannot use conjugate pairs");
    for (int m : o.modes) {
      if (m > o.channels * o.channels) bad.push_back("multi_siso needs modes <= channels^2");
    }
  }
  if (!bad.empty()) throw ValidationError("invalid synth options", bad);
}

}  // namespace

ModelStack synth(const SynthOptions& opts) {
  check_options(opts);
  Rng rng(opts.seed);
  const int h = opts.channels;
  ModelStack stack;
  for (int l = 0; l < opts.num_layers; ++l) {
    const int n = opts.modes.size() == 1 ? opts.modes[0] : opts.modes[l];
    DiagonalLayer layer;
    layer.name = "layer" + std::to_string(l);
    layer.conjugate_pairs = opts.conjugate_pairs;
    layer.lambda.resize(n);
    layer.B = CMatrix::Zero(n, h);
    layer.C = CMatrix::Zero(h, n);
    if (opts.bidirectional) layer.C_bwd = CMatrix::Zero(h, n);
    RVector delta(n);

    for (int i = 0; i < n; ++i) {
      const double radius = rng.uniform(opts.radius_min, opts.radius_max);
      const double phase = opts.conjugate_pairs ? rng.uniform(0.0, std::numbers::pi)
                                                : rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double gain = std::exp(opts.coupling_spread * rng.normal());
      if (opts.continuous) {
        const double dt = std::exp(rng.uniform(std::log(1e-3), std::log(1e-1)));
        delta(i) = dt;
        layer.lambda(i) = cdouble(std::log(radius), phase) / dt;
      } else {
        layer.lambda(i) = std::polar(radius, phase);
      }

      if (opts.structure == Structure::multi_siso) {
        const int in = i % h;
        const int out = (i / h) % h;
        layer.B(i, in) = complex_normal(rng);
        layer.C(out, i) = gain * complex_normal(rng);
        if (layer.C_bwd) (*layer.C_bwd)(out, i) = gain * complex_normal(rng);
      } else {
        const double scale = 1.0 / std::sqrt(static_cast<double>(h));
        for (int c = 0; c < h; ++c) layer.B(i, c) = scale * complex_normal(rng);
        for (int c = 0; c < h; ++c) layer.C(c, i) = gain * scale * complex_normal(rng);
        if (layer.C_bwd) {
          for (int c = 0; c < h; ++c) (*layer.C_bwd)(c, i) = gain * scale * complex_normal(rng);
        }
      }
    }
    if (opts.continuous) {
      layer.time_domain = TimeDomain::continuous;
      layer.delta = delta;
      for (int i = 0; i < n; ++i) {
        const cdouble lam = layer.lambda(i);
        const cdouble zoh = (std::exp(lam * delta(i)) - 1.0) / lam;
        layer.B.row(i) /= zoh;
      }
    }
    stack.layers.push_back(std::move(layer));
  }
  require_valid(stack);
  return stack;
}

std::string to_string(Structure s) { return s == Structure::mimo ? "mimo" : "multi_siso"; }

Structure structure_from_string(const std::string& s) {
  if (s == "mimo") return Structure::mimo;
  if (s == "multi_siso") return Structure::multi_siso;
  throw std::invalid_argument("unknown structure '" + s + "'");
}

}  // namespace ssmprune
