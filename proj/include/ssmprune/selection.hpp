#pragma once

#include <optional>

#include "ssmprune/baselines.hpp"

namespace ssmprune {

enum class Policy { uniform_ratio, global_raw, global_prefix };

/// Keep/prune partition of one layer, in original mode indices (ascending).
/// Counts are in stored-mode units; on conjugate-pair layers each unit is a pair.
struct LayerDecision {
  std::string layer;
  int n = 0;
  bool conjugate_pairs = false;
  std::vector<int> kept;
  std::vector<int> pruned;

  int state_multiplicity() const { return conjugate_pairs ? 2 : 1; }
};

struct PruneDecision {
  Policy policy = Policy::global_prefix;
  Method method = Method::aire;
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
  std::optional<double> requested_ratio;
  std::optional<double> threshold;
  double tau = 0.0;  // +inf when nothing is kept by the budget
  double achieved_ratio = 0.0;
  int layer_floor = 0;
  std::vector<LayerDecision> layers;

  int total_modes() const;
  int kept_modes() const;
};

struct SelectionOptions {
  std::optional<double> ratio;      // fraction of stored modes to prune, in [0, 1]
  std::optional<double> threshold;  // explicit tau (global policies only)
  int layer_floor = 0;              // minimum kept units per layer (0 or 1)
};

/// Kept-mode budget round_half_up(total * (1 - p)).
int keep_budget(int total_modes, double prune_ratio);

/// Global threshold over prefix-normalized scores; every layer keeps a prefix
/// of its descending sort. With a ratio, tau is the B-th largest score and
/// ties at tau are resolved in (layer, sorted position) order so the kept count
/// is exactly B. A ratio of 1 keeps one pair per conjugate-pair layer.
PruneDecision select_global_prefix(const ScoreTable& table, const SelectionOptions& opts);

/// Each layer drops its floor(p * n) lowest raw scores.
PruneDecision select_uniform_ratio(const ScoreTable& table, double ratio, int layer_floor = 0);

/// One descending ranking of raw scores across layers; keeps the top B.
PruneDecision select_global_raw(const ScoreTable& table, const SelectionOptions& opts);

/// Dispatches on table.scope.
PruneDecision select(const ScoreTable& table, const SelectionOptions& opts);

/// Empty iff the decision is a partition consistent with the stack's layers.
std::vector<std::string> check_decision(const PruneDecision& decision, const ModelStack& stack);

/// Removes pruned modes; layers with nothing kept are dropped. Throws
/// ValidationError on an inconsistent decision or when every layer is dropped.
ModelStack materialize(const PruneDecision& decision, const ModelStack& stack);

std::string to_string(Policy p);
Policy policy_from_string(const std::string& s);
Policy policy_for_scope(Scope s);

}  // namespace ssmprune
