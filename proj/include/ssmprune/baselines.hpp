#pragma once

#include <cstdint>

#include "ssmprune/model.hpp"

namespace ssmprune {

enum class Method { random, magnitude, lamp, hinf, last, aire };
enum class Scope { uniform, global, prefix };

inline constexpr double kDefaultEpsilon = 1e-12;

/// Scores of one layer. `raw`, `energy` are indexed by original mode index;
/// `prefix_sums` and `normalized` by position in the descending sort `order`.
struct LayerScores {
  std::string layer;
  int n = 0;
  bool conjugate_pairs = false;
  std::vector<double> raw;
  std::vector<double> energy;
  std::vector<int> order;
  std::vector<double> prefix_sums;
  std::vector<double> normalized;  // prefix scope only

  /// Position of each original index in `order`.
  std::vector<int> ranks() const;
};

struct ScoreTable {
  Method method = Method::aire;
  Scope scope = Scope::prefix;
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
  std::vector<LayerScores> layers;
};

/// |lambda_i| ||B_{i,:}|| ||C_{:,i}||.
double magnitude_score(const DiagonalLayer& layer, int i);

/// ||C_{:,i}||^2 ||B_{i,:}||^2 / (1 - |lambda_i|)^2.
double hinf_score(const DiagonalLayer& layer, int i);

/// Prefix-normalized magnitude^2 scores, returned per original index.
std::vector<double> lamp_score(const DiagonalLayer& layer, double epsilon = kDefaultEpsilon);

/// Prefix-normalized H-infinity scores, returned per original index.
std::vector<double> last_score(const DiagonalLayer& layer, double epsilon = kDefaultEpsilon);

/// Deterministic scores in (0, 1); `stream` separates layers sharing a seed.
std::vector<double> random_score(const DiagonalLayer& layer, std::uint64_t seed,
                                 std::uint64_t stream = 0);

/// Stable descending order: score desc, then original index asc.
std::vector<int> descending_order(const std::vector<double>& scores);

/// Sorts raw scores, accumulates prefix sums S(i) and s(i) = raw_(i) / (S(i) + eps).
LayerScores prefix_normalize(std::string layer, const std::vector<double>& raw, double epsilon);

ScoreTable aire_score_table(const ModelStack& stack, double epsilon = kDefaultEpsilon);
ScoreTable aire_score_table(const DiagonalLayer& layer, double epsilon = kDefaultEpsilon);

/// Generic builder used by the CLI; throws std::invalid_argument on an
/// incompatible method/scope pair (see check_compatible).
ScoreTable score_table(const ModelStack& stack, Method method, Scope scope,
                       double epsilon = kDefaultEpsilon, std::uint64_t seed = 0);

bool is_prefix_method(Method m);
Scope default_scope(Method m);
void check_compatible(Method m, Scope s);

std::string to_string(Method m);
std::string to_string(Scope s);
Method method_from_string(const std::string& s);
Scope scope_from_string(const std::string& s);

}  // namespace ssmprune
