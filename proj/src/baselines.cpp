#include "ssmprune/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "ssmprune/energy.hpp"
#include "ssmprune/rng.hpp"

namespace ssmprune {

std::vector<int> LayerScores::ranks() const {
  std::vector<int> r(order.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) r[order[pos]] = static_cast<int>(pos);
  return r;
}

double magnitude_score(const DiagonalLayer& layer, int i) {
  return std::abs(layer.lambda(i)) * std::sqrt(coupling_sq(layer, i));
}

double hinf_score(const DiagonalLayer& layer, int i) {
  const double mag = std::abs(layer.lambda(i));
  if (!(mag < 1.0)) {
    throw std::domain_error("hinf_score: |lambda| >= 1 at index " + std::to_string(i) +
                            " of layer '" + layer.name + "'");
  }
  const double gap = 1.0 - mag;
  return coupling_sq(layer, i) / (gap * gap);
}

std::vector<int> descending_order(const std::vector<double>& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

LayerScores prefix_normalize(std::string layer, const std::vector<double>& raw, double epsilon) {
  LayerScores out;
  out.layer = std::move(layer);
  out.n = static_cast<int>(raw.size());
  out.raw = raw;
  out.order = descending_order(raw);
  out.prefix_sums.resize(raw.size());
  out.normalized.resize(raw.size());
  double running = 0.0;
  for (std::size_t pos = 0; pos < raw.size(); ++pos) {
    const double v = raw[out.order[pos]];
    running += v;
    out.prefix_sums[pos] = running;
    out.normalized[pos] = v / (running + epsilon);
  }
  return out;
}

namespace {

std::vector<double> per_original(const LayerScores& s) {
  std::vector<double> out(s.order.size());
  for (std::size_t pos = 0; pos < s.order.size(); ++pos) out[s.order[pos]] = s.normalized[pos];
  return out;
}

std::vector<double> raw_scores(const DiagonalLayer& layer, Method m, std::uint64_t seed,
                               std::uint64_t stream) {
  const int n = layer.n();
  std::vector<double> raw(n);
  switch (m) {
    case Method::aire:
      for (int i = 0; i < n; ++i) raw[i] = mode_energy(layer, i).E;
      break;
    case Method::hinf:
    case Method::last:
      for (int i = 0; i < n; ++i) raw[i] = hinf_score(layer, i);
      break;
    case Method::magnitude:
      for (int i = 0; i < n; ++i) raw[i] = magnitude_score(layer, i);
      break;
    case Method::lamp:
      for (int i = 0; i < n; ++i) {
        const double m1 = magnitude_score(layer, i);
        raw[i] = m1 * m1;
      }
      break;
    case Method::random:
      raw = random_score(layer, seed, stream);
      break;
  }
  return raw;
}

}  // namespace

std::vector<double> lamp_score(const DiagonalLayer& layer, double epsilon) {
  return per_original(prefix_normalize(layer.name, raw_scores(layer, Method::lamp, 0, 0), epsilon));
}

std::vector<double> last_score(const DiagonalLayer& layer, double epsilon) {
  return per_original(prefix_normalize(layer.name, raw_scores(layer, Method::last, 0, 0), epsilon));
}

std::vector<double> random_score(const DiagonalLayer& layer, std::uint64_t seed,
                                 std::uint64_t stream) {
  Rng rng(seed, stream);
  std::vector<double> out(layer.n());
  for (auto& v : out) v = rng.uniform_open();
  return out;
}

bool is_prefix_method(Method m) {
  return m == Method::aire || m == Method::lamp || m == Method::last;
}

Scope default_scope(Method m) {
  return is_prefix_method(m) ? Scope::prefix : Scope::global;
}

void check_compatible(Method m, Scope s) {
  if (m == Method::lamp || m == Method::last) {
    if (s != Scope::prefix) {
      throw std::invalid_argument(to_string(m) + " is a prefix-normalized score; use --policy prefix");
    }
  } else if (m != Method::aire && s == Scope::prefix) {
    throw std::invalid_argument(to_string(m) + " scores cannot be combined with the prefix policy");
  }
}

ScoreTable score_table(const ModelStack& stack, Method method, Scope scope, double epsilon,
                       std::uint64_t seed) {
  check_compatible(method, scope);
  if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be nonnegative");
  ScoreTable table;
  table.method = method;
  table.scope = scope;
  table.epsilon = epsilon;
  table.seed = seed;
  table.layers.reserve(stack.layers.size());
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    const auto& layer = stack.layers[l];
    const auto raw = raw_scores(layer, method, seed, l);
    LayerScores ls;
    if (scope == Scope::prefix) {
      ls = prefix_normalize(layer.name, raw, epsilon);
    } else {
      ls.layer = layer.name;
      ls.n = layer.n();
      ls.raw = raw;
      ls.order = descending_order(raw);
      ls.prefix_sums.resize(raw.size());
      double running = 0.0;
      for (std::size_t pos = 0; pos < raw.size(); ++pos) {
        running += raw[ls.order[pos]];
        ls.prefix_sums[pos] = running;
      }
    }
    ls.conjugate_pairs = layer.conjugate_pairs;
    ls.energy.resize(layer.n());
    for (int i = 0; i < layer.n(); ++i) {
      ls.energy[i] = method == Method::aire ? raw[i] : mode_energy(layer, i).E;
    }
    table.layers.push_back(std::move(ls));
  }
  return table;
}

ScoreTable aire_score_table(const ModelStack& stack, double epsilon) {
  return score_table(stack, Method::aire, Scope::prefix, epsilon, 0);
}

ScoreTable aire_score_table(const DiagonalLayer& layer, double epsilon) {
  ModelStack stack;
  stack.layers.push_back(layer);
  return aire_score_table(stack, epsilon);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::random: return "random";
    case Method::magnitude: return "magnitude";
    case Method::lamp: return "lamp";
    case Method::hinf: return "hinf";
    case Method::last: return "last";
    case Method::aire: return "aire";
  }
  return "unknown";
}

std::string to_string(Scope s) {
  switch (s) {
    case Scope::uniform: return "uniform";
    case Scope::global: return "global";
    case Scope::prefix: return "prefix";
  }
  return "unknown";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::random, Method::magnitude, Method::lamp, Method::hinf, Method::last,
                   Method::aire}) {
    if (to_string(m) == s) return m;
  }
  throw std::invalid_argument("unknown method '" + s + "'");
}

Scope scope_from_string(const std::string& s) {
  for (Scope sc : {Scope::uniform, Scope::global, Scope::prefix}) {
    if (to_string(sc) == s) return sc;
  }
  throw std::invalid_argument("unknown policy '" + s + "'");
}

}  // namespace ssmprune
