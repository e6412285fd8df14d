#include "ssmprune/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ssmprune {

namespace {

constexpr double kCountSlack = 1e-9;

void check_ratio(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("prune ratio must lie in [0, 1], got " + std::to_string(p));
  }
}

void check_table(const ScoreTable& table) {
  if (table.layers.empty()) throw std::invalid_argument("selection: score table has no layers");
}

PruneDecision start_decision(const ScoreTable& table, Policy policy, const SelectionOptions& opts) {
  PruneDecision d;
  d.policy = policy;
  d.method = table.method;
  d.epsilon = table.epsilon;
  d.seed = table.seed;
  d.requested_ratio = opts.ratio;
  d.threshold = opts.threshold;
  d.layer_floor = opts.layer_floor;
  return d;
}

// Fills kept/pruned from the first `keep` positions of the layer's sort order,
// raising `keep` to the layer floor where required.
LayerDecision keep_sorted_prefix(const LayerScores& ls, int keep, int floor) {
  keep = std::clamp(std::max(keep, floor), 0, ls.n);
  LayerDecision ld;
  ld.layer = ls.layer;
  ld.n = ls.n;
  ld.conjugate_pairs = ls.conjugate_pairs;
  ld.kept.assign(ls.order.begin(), ls.order.begin() + keep);
  ld.pruned.assign(ls.order.begin() + keep, ls.order.end());
  std::sort(ld.kept.begin(), ld.kept.end());
  std::sort(ld.pruned.begin(), ld.pruned.end());
  return ld;
}

int layer_floor_for(const LayerScores& ls, const SelectionOptions& opts) {
  int floor = std::max(opts.layer_floor, 0);
  if (opts.ratio && *opts.ratio == 1.0 && ls.conjugate_pairs) floor = std::max(floor, 1);
  return floor;
}

void finish(PruneDecision& d) {
  const int total = d.total_modes();
  d.achieved_ratio = total == 0 ? 0.0 : 1.0 - static_cast<double>(d.kept_modes()) / total;
}

void check_target(const SelectionOptions& opts) {
  if (opts.ratio.has_value() == opts.threshold.has_value()) {
    throw std::invalid_argument("selection needs exactly one of a prune ratio or a threshold");
  }
  if (opts.ratio) check_ratio(*opts.ratio);
  if (opts.threshold && std::isnan(*opts.threshold)) {
    throw std::invalid_argument("threshold must not be NaN");
  }
  if (opts.layer_floor < 0 || opts.layer_floor > 1) {
    throw std::invalid_argument("layer floor must be 0 or 1");
  }
}

struct Entry {
  double score;
  int layer;
  int slot;  // sorted position (prefix) or original index (raw)
};

void sort_entries(std::vector<Entry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.layer != b.layer) return a.layer < b.layer;
    return a.slot < b.slot;
  });
}

}  // namespace

int PruneDecision::total_modes() const {
  int t = 0;
  for (const auto& l : layers) t += l.n;
  return t;
}

int PruneDecision::kept_modes() const {
  int t = 0;
  for (const auto& l : layers) t += static_cast<int>(l.kept.size());
  return t;
}

int keep_budget(int total_modes, double prune_ratio) {
  check_ratio(prune_ratio);
  const double exact = total_modes * (1.0 - prune_ratio);
  return std::clamp(static_cast<int>(std::floor(exact + 0.5 + kCountSlack)), 0, total_modes);
}

PruneDecision select_global_prefix(const ScoreTable& table, const SelectionOptions& opts) {
  check_table(table);
  check_target(opts);
  if (table.scope != Scope::prefix) {
    throw std::invalid_argument("select_global_prefix requires a prefix-normalized score table");
  }
  PruneDecision d = start_decision(table, Policy::global_prefix, opts);
  const int num_layers = static_cast<int>(table.layers.size());
  std::vector<int> keep(num_layers, 0);

  if (opts.ratio) {
    std::vector<Entry> entries;
    int total = 0;
    for (int l = 0; l < num_layers; ++l) {
      const auto& ls = table.layers[l];
      total += ls.n;
      for (int pos = 0; pos < ls.n; ++pos) entries.push_back({ls.normalized[pos], l, pos});
    }
    sort_entries(entries);
    const int budget = keep_budget(total, *opts.ratio);
    d.tau = budget > 0 ? entries[budget - 1].score : std::numeric_limits<double>::infinity();
    for (int k = 0; k < budget; ++k) ++keep[entries[k].layer];
  } else {
    d.tau = *opts.threshold;
    for (int l = 0; l < num_layers; ++l) {
      const auto& s = table.layers[l].normalized;
      int k = 0;
      for (int pos = 0; pos < static_cast<int>(s.size()); ++pos) {
        if (s[pos] >= d.tau) k = pos + 1;
      }
      keep[l] = k;
    }
  }

  for (int l = 0; l < num_layers; ++l) {
    const auto& ls = table.layers[l];
    d.layers.push_back(keep_sorted_prefix(ls, keep[l], layer_floor_for(ls, opts)));
  }
  finish(d);
  return d;
}

PruneDecision select_uniform_ratio(const ScoreTable& table, double ratio, int layer_floor) {
  check_table(table);
  SelectionOptions opts;
  opts.ratio = ratio;
  opts.layer_floor = layer_floor;
  check_target(opts);
  PruneDecision d = start_decision(table, Policy::uniform_ratio, opts);
  d.tau = std::numeric_limits<double>::quiet_NaN();
  for (const auto& ls : table.layers) {
    const int drop = static_cast<int>(std::floor(ratio * ls.n + kCountSlack));
    d.layers.push_back(keep_sorted_prefix(ls, ls.n - drop, layer_floor_for(ls, opts)));
  }
  finish(d);
  return d;
}

PruneDecision select_global_raw(const ScoreTable& table, const SelectionOptions& opts) {
  check_table(table);
  check_target(opts);
  PruneDecision d = start_decision(table, Policy::global_raw, opts);
  const int num_layers = static_cast<int>(table.layers.size());

  std::vector<Entry> entries;
  int total = 0;
  for (int l = 0; l < num_layers; ++l) {
    const auto& ls = table.layers[l];
    total += ls.n;
    for (int i = 0; i < ls.n; ++i) entries.push_back({ls.raw[i], l, i});
  }
  sort_entries(entries);

  std::vector<std::vector<bool>> kept(num_layers);
  for (int l = 0; l < num_layers; ++l) kept[l].assign(table.layers[l].n, false);
  if (opts.ratio) {
    const int budget = keep_budget(total, *opts.ratio);
    d.tau = budget > 0 ? entries[budget - 1].score : std::numeric_limits<double>::infinity();
    for (int k = 0; k < budget; ++k) kept[entries[k].layer][entries[k].slot] = true;
  } else {
    d.tau = *opts.threshold;
    for (const auto& e : entries) {
      if (e.score >= d.tau) kept[e.layer][e.slot] = true;
    }
  }

  for (int l = 0; l < num_layers; ++l) {
    const auto& ls = table.layers[l];
    LayerDecision ld;
    ld.layer = ls.layer;
    ld.n = ls.n;
    ld.conjugate_pairs = ls.conjugate_pairs;
    for (int i = 0; i < ls.n; ++i) (kept[l][i] ? ld.kept : ld.pruned).push_back(i);
    const int floor = layer_floor_for(ls, opts);
    if (static_cast<int>(ld.kept.size()) < floor) ld = keep_sorted_prefix(ls, floor, floor);
    d.layers.push_back(std::move(ld));
  }
  finish(d);
  return d;
}

PruneDecision select(const ScoreTable& table, const SelectionOptions& opts) {
  switch (table.scope) {
    case Scope::prefix: return select_global_prefix(table, opts);
    case Scope::global: return select_global_raw(table, opts);
    case Scope::uniform:
      if (!opts.ratio || opts.threshold) {
        throw std::invalid_argument("the uniform policy takes a prune ratio, not a threshold");
      }
      return select_uniform_ratio(table, *opts.ratio, opts.layer_floor);
  }
  throw std::logic_error("unreachable");
}

std::vector<std::string> check_decision(const PruneDecision& decision, const ModelStack& stack) {
  std::vector<std::string> out;
  if (decision.layers.size() != stack.layers.size()) {
    out.push_back("decision covers " + std::to_string(decision.layers.size()) +
                  " layers, model has " + std::to_string(stack.layers.size()));
    return out;
  }
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    const auto& ld = decision.layers[l];
    const auto& layer = stack.layers[l];
    const std::string where = "layer '" + layer.name + "': ";
    if (ld.layer != layer.name) out.push_back(where + "decision names layer '" + ld.layer + "'");
    if (ld.n != layer.n()) {
      out.push_back(where + "decision has n = " + std::to_string(ld.n) + ", model has " +
                    std::to_string(layer.n()));
      continue;
    }
    std::vector<int> seen(layer.n(), 0);
    for (const auto* set : {&ld.kept, &ld.pruned}) {
      for (int i : *set) {
        if (i < 0 || i >= layer.n()) {
          out.push_back(where + "index " + std::to_string(i) + " out of range");
        } else {
          ++seen[i];
        }
      }
    }
    for (int i = 0; i < layer.n(); ++i) {
      if (seen[i] != 1) {
        out.push_back(where + "mode " + std::to_string(i) + " appears " + std::to_string(seen[i]) +
                      " times across kept/pruned");
      }
    }
  }
  return out;
}

ModelStack materialize(const PruneDecision& decision, const ModelStack& stack) {
  auto problems = check_decision(decision, stack);
  if (!problems.empty()) throw ValidationError("inconsistent prune decision", std::move(problems));
  ModelStack out;
  out.format_version = stack.format_version;
  out.approximate = stack.approximate;
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    std::vector<int> kept = decision.layers[l].kept;
    if (kept.empty()) continue;
    std::sort(kept.begin(), kept.end());
    out.layers.push_back(select_modes(stack.layers[l], kept));
  }
  if (out.layers.empty()) {
    throw ValidationError("materialize", {"every layer was pruned away; nothing remains"});
  }
  return out;
}

std::string to_string(Policy p) {
  switch (p) {
    case Policy::uniform_ratio: return "uniform_ratio";
    case Policy::global_raw: return "global_raw";
    case Policy::global_prefix: return "global_prefix";
  }
  return "unknown";
}

Policy policy_from_string(const std::string& s) {
  for (Policy p : {Policy::uniform_ratio, Policy::global_raw, Policy::global_prefix}) {
    if (to_string(p) == s) return p;
  }
  throw std::invalid_argument("unknown policy '" + s + "'");
}

Policy policy_for_scope(Scope s) {
  switch (s) {
    case Scope::uniform: return Policy::uniform_ratio;
    case Scope::global: return Policy::global_raw;
    case Scope::prefix: return Policy::global_prefix;
  }
  return Policy::global_prefix;
}

}  // namespace ssmprune
