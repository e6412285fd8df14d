#include "ssmprune/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssmprune/energy.hpp"
#include "ssmprune/linalg.hpp"

namespace ssmprune {

double kappa(double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::domain_error("kappa: rho must lie in [0, 1), got " + std::to_string(rho));
  }
  return std::sqrt((1.0 + rho) / (1.0 - rho));
}

HinfEnvelope mode_hinf_envelope(const DiagonalLayer& layer, int i) {
  if (i < 0 || i >= layer.n()) throw std::out_of_range("mode_hinf_envelope: index out of range");
  const double mag = std::abs(layer.lambda(i));
  if (!(mag < 1.0)) throw std::domain_error("mode_hinf_envelope: |lambda| >= 1");
  const double a2 = coupling_sq(layer, i, OutputCombine::sum);
  const double energy = a2 / (1.0 - mag * mag);
  HinfEnvelope env;
  env.peak_form = std::sqrt(a2) / (1.0 - mag);
  env.energy_form = std::sqrt(energy) * std::sqrt((1.0 + mag) / (1.0 - mag));
  return env;
}

int default_grid_points(double rho) {
  const double resolved = std::ceil(64.0 / (1.0 - std::clamp(rho, 0.0, 1.0 - 1e-12)));
  return static_cast<int>(std::max(4096.0, std::min(resolved, 1e8)));
}

double empirical_hinf(const DiagonalLayer& layer, int grid_points) {
  if (layer.n() == 0) return 0.0;
  const auto grid = uniform_frequency_grid(grid_points);
  double peak = 0.0;
  std::vector<Direction> dirs{Direction::forward};
  if (layer.bidirectional()) dirs.push_back(Direction::backward);
  for (Direction dir : dirs) {
    for (const auto& G : frequency_response(layer, grid, dir)) {
      peak = std::max(peak, spectral_norm(G));
    }
  }
  return peak;
}

CertificateReport certify_layer(const DiagonalLayer& layer, std::span<const int> pruned,
                                const CertifyOptions& opts) {
  CertificateReport rep;
  rep.layer = layer.name;
  rep.pruned_modes = static_cast<int>(pruned.size());
  if (pruned.empty()) return rep;

  const DiagonalLayer tail = expand_conjugate_pairs(select_modes(layer, pruned));
  rep.pruned_members = tail.n();
  double sum_roots = 0.0;
  for (int j = 0; j < tail.n(); ++j) {
    const double mag = std::abs(tail.lambda(j));
    if (!(mag < 1.0)) throw std::domain_error("certify: pruned mode with |lambda| >= 1");
    const double a2 = coupling_sq(tail, j, OutputCombine::sum);
    const double e = a2 / (1.0 - mag * mag);
    rep.energy_tail += e;
    sum_roots += std::sqrt(e);
    rep.rho = std::max(rep.rho, mag);
    rep.last_style_bound += std::sqrt(a2) / (1.0 - mag);
  }
  rep.kappa = kappa(rep.rho);
  rep.bound_sum_roots = rep.kappa * sum_roots;
  rep.bound_root_sum = rep.kappa * std::sqrt(rep.pruned_members * rep.energy_tail);
  rep.bound = std::min(rep.bound_sum_roots, rep.bound_root_sum);
  rep.grid_points = opts.grid_points > 0 ? opts.grid_points : default_grid_points(rep.rho);
  rep.empirical_hinf = empirical_hinf(tail, rep.grid_points);
  return rep;
}

std::vector<CertificateReport> certify(const ModelStack& stack, const PruneDecision& decision,
                                       const CertifyOptions& opts) {
  auto problems = check_decision(decision, stack);
  if (!problems.empty()) throw ValidationError("inconsistent prune decision", std::move(problems));
  std::vector<CertificateReport> out;
  out.reserve(stack.layers.size());
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    out.push_back(certify_layer(stack.layers[l], decision.layers[l].pruned, opts));
  }
  return out;
}

namespace {

double gain_envelope(const DiagonalLayer& layer, std::span<const int> modes) {
  if (modes.empty()) return 0.0;
  const DiagonalLayer part = expand_conjugate_pairs(select_modes(layer, modes));
  double g = 0.0;
  for (int j = 0; j < part.n(); ++j) g += mode_hinf_envelope(part, j).peak_form;
  return g;
}

}  // namespace

StackBound compose_stack_bound(const ModelStack& stack, const PruneDecision& decision,
                               const std::vector<CertificateReport>& certs,
                               std::span<const double> lipschitz) {
  const std::size_t L = stack.layers.size();
  if (certs.size() != L || decision.layers.size() != L) {
    throw std::invalid_argument("compose_stack_bound: layer count mismatch");
  }
  if (!lipschitz.empty() && lipschitz.size() != L) {
    throw std::invalid_argument("compose_stack_bound: need one Lipschitz constant per layer");
  }
  StackBound sb;
  sb.lipschitz.assign(L, 1.0);
  if (!lipschitz.empty()) sb.lipschitz.assign(lipschitz.begin(), lipschitz.end());
  for (std::size_t l = 0; l < L; ++l) {
    std::vector<int> all(stack.layers[l].n());
    for (int i = 0; i < stack.layers[l].n(); ++i) all[i] = i;
    sb.full_gain.push_back(gain_envelope(stack.layers[l], all));
    sb.reduced_gain.push_back(gain_envelope(stack.layers[l], decision.layers[l].kept));
  }
  for (std::size_t l = 0; l < L; ++l) {
    double term = sb.lipschitz[l] * certs[l].bound;
    for (std::size_t m = 0; m < l; ++m) term *= sb.lipschitz[m] * (1.0 + sb.full_gain[m]);
    for (std::size_t m = l + 1; m < L; ++m) term *= sb.lipschitz[m] * (1.0 + sb.reduced_gain[m]);
    sb.bound += term;
  }
  return sb;
}

DiagonalLayer difference_layer(const DiagonalLayer& full, const DiagonalLayer* reduced) {
  if (!reduced || reduced->n() == 0) return full;
  if (reduced->h() != full.h() || reduced->conjugate_pairs != full.conjugate_pairs ||
      reduced->bidirectional() != full.bidirectional()) {
    throw std::invalid_argument("difference_layer: layer '" + full.name +
                                "' changed shape or flags between models");
  }
  auto same_mode = [&](int i, int j) {
    if (full.lambda(i) != reduced->lambda(j)) return false;
    if (full.B.row(i) != reduced->B.row(j) || full.C.col(i) != reduced->C.col(j)) return false;
    return !full.C_bwd || full.C_bwd->col(i) == reduced->C_bwd->col(j);
  };
  std::vector<bool> full_matched(full.n(), false);
  std::vector<int> reduced_left;
  for (int j = 0; j < reduced->n(); ++j) {
    int hit = -1;
    for (int i = 0; i < full.n() && hit < 0; ++i) {
      if (!full_matched[i] && same_mode(i, j)) hit = i;
    }
    if (hit >= 0) {
      full_matched[hit] = true;
    } else {
      reduced_left.push_back(j);
    }
  }
  std::vector<int> full_left;
  for (int i = 0; i < full.n(); ++i) {
    if (!full_matched[i]) full_left.push_back(i);
  }

  const DiagonalLayer a = select_modes(full, full_left);
  const DiagonalLayer b = select_modes(*reduced, reduced_left);
  const int n1 = a.n();
  const int n2 = b.n();
  const int h = full.h();
  DiagonalLayer d;
  d.name = full.name;
  d.time_domain = full.time_domain;
  d.conjugate_pairs = full.conjugate_pairs;
  d.lambda.resize(n1 + n2);
  d.lambda << a.lambda, b.lambda;
  d.B.resize(n1 + n2, h);
  d.B << a.B, b.B;
  d.C.resize(h, n1 + n2);
  d.C << a.C, -b.C;
  if (full.C_bwd) {
    CMatrix cb(h, n1 + n2);
    cb << *a.C_bwd, -*b.C_bwd;
    d.C_bwd = std::move(cb);
  }
  return d;
}

namespace {

LayerDistortion evaluate_difference(const DiagonalLayer& diff, const DistortionOptions& opts) {
  LayerDistortion out;
  out.layer = diff.name;
  if (diff.n() == 0) return out;
  out.exact_h2 = layer_energy_exact(diff);

  const DiagonalLayer realized = expand_conjugate_pairs(diff);
  const int h = realized.h();
  std::vector<Direction> dirs{Direction::forward};
  if (realized.bidirectional()) dirs.push_back(Direction::backward);
  double sq = 0.0;
  for (Direction dir : dirs) {
    for (const auto& slice : impulse_response(realized, opts.horizon, dir)) sq += slice.H.squaredNorm();
  }
  sq /= static_cast<double>(dirs.size());
  out.impulse_rmse = std::sqrt(sq / (static_cast<double>(opts.horizon) * h * h));

  double rho = 0.0;
  for (int i = 0; i < realized.n(); ++i) rho = std::max(rho, std::abs(realized.lambda(i)));
  const int grid = opts.grid_points > 0 ? opts.grid_points : default_grid_points(rho);
  out.empirical_hinf = empirical_hinf(realized, grid);
  return out;
}

void add_mc(LayerDistortion& d, const DiagonalLayer& full, const DiagonalLayer* reduced,
            const DistortionOptions& opts) {
  if (opts.mc_steps <= 0) return;
  const auto pf = white_noise_power(full, opts.mc_steps, opts.mc_trials, opts.seed);
  PowerEstimate pr;
  if (reduced && reduced->n() > 0) pr = white_noise_power(*reduced, opts.mc_steps, opts.mc_trials, opts.seed);
  d.mc_power_delta = pf.mean - pr.mean;
  d.mc_std_error = std::hypot(pf.std_error, pr.std_error);
}

void check_horizon(const DistortionOptions& opts) {
  if (opts.horizon < 1) throw std::invalid_argument("distortion: horizon must be >= 1");
}

}  // namespace

std::vector<LayerDistortion> distortion(const ModelStack& full, const PruneDecision& decision,
                                        const DistortionOptions& opts) {
  check_horizon(opts);
  auto problems = check_decision(decision, full);
  if (!problems.empty()) throw ValidationError("inconsistent prune decision", std::move(problems));
  std::vector<LayerDistortion> out;
  for (std::size_t l = 0; l < full.layers.size(); ++l) {
    const auto& layer = full.layers[l];
    const auto& ld = decision.layers[l];
    const DiagonalLayer pruned_part = select_modes(layer, ld.pruned);
    LayerDistortion d = evaluate_difference(pruned_part, opts);
    d.layer = layer.name;
    d.modal_drop = layer_energy_modal(pruned_part);
    if (opts.mc_steps > 0) {
      const DiagonalLayer kept_part = select_modes(layer, ld.kept);
      add_mc(d, layer, &kept_part, opts);
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<LayerDistortion> distortion(const ModelStack& full, const ModelStack& reduced,
                                        const DistortionOptions& opts) {
  check_horizon(opts);
  for (const auto& r : reduced.layers) {
    const bool known = std::any_of(full.layers.begin(), full.layers.end(),
                                   [&](const DiagonalLayer& f) { return f.name == r.name; });
    if (!known) {
      throw ValidationError("mismatched models", {"reduced layer '" + r.name + "' is not in the full model"});
    }
  }
  std::vector<LayerDistortion> out;
  for (const auto& layer : full.layers) {
    const DiagonalLayer* match = nullptr;
    for (const auto& r : reduced.layers) {
      if (r.name == layer.name) match = &r;
    }
    LayerDistortion d = evaluate_difference(difference_layer(layer, match), opts);
    d.layer = layer.name;
    d.modal_drop = layer_energy_modal(layer) - (match ? layer_energy_modal(*match) : 0.0);
    add_mc(d, layer, match, opts);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<SweepRow> sweep(const ModelStack& stack, Method method, Scope scope,
                            std::span<const double> ratios, const SweepOptions& opts) {
  const ScoreTable table = score_table(stack, method, scope, opts.epsilon, opts.seed);
  DistortionOptions dopts;
  dopts.horizon = opts.horizon;
  dopts.grid_points = opts.grid_points;
  CertifyOptions copts;
  copts.grid_points = opts.grid_points;

  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    SelectionOptions sel;
    sel.ratio = ratio;
    sel.layer_floor = opts.layer_floor;
    const PruneDecision decision = select(table, sel);
    SweepRow row;
    row.ratio = ratio;
    row.achieved_ratio = decision.achieved_ratio;
    row.kept_modes = decision.kept_modes();
    row.total_modes = decision.total_modes();
    row.tau = decision.tau;
    for (const auto& d : distortion(stack, decision, dopts)) {
      row.modal_drop += d.modal_drop;
      row.exact_h2 += d.exact_h2;
    }
    for (const auto& c : certify(stack, decision, copts)) {
      row.empirical_hinf = std::max(row.empirical_hinf, c.empirical_hinf);
      row.bound = std::max(row.bound, c.bound);
      row.last_style_bound = std::max(row.last_style_bound, c.last_style_bound);
    }
    for (const auto& ld : decision.layers) {
      row.kept_fraction.emplace_back(ld.layer, ld.n == 0 ? 0.0 : static_cast<double>(ld.kept.size()) / ld.n);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ssmprune
