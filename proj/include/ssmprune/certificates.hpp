#pragma once

#include <optional>
#include <span>

#include "ssmprune/selection.hpp"

namespace ssmprune {

/// sqrt((1 + rho) / (1 - rho)) for rho in [0, 1).
double kappa(double rho);

/// Peak-gain envelope of one realized mode, in both algebraic forms:
///   alpha / (1 - |lambda|)  and  sqrt(E) sqrt((1 + |lambda|) / (1 - |lambda|)).
/// Bidirectional layers use the summed forward/backward output norm so the
/// envelope bounds each direction separately.
struct HinfEnvelope {
  double peak_form = 0.0;
  double energy_form = 0.0;
};
HinfEnvelope mode_hinf_envelope(const DiagonalLayer& layer, int i);

/// Grid density that resolves resonances of width ~ (1 - rho).
int default_grid_points(double rho);

/// max over a uniform grid (and over directions) of the spectral norm of G(e^{jw}).
double empirical_hinf(const DiagonalLayer& layer, int grid_points);

/// Worst-case error certificate for removing a set of modes from one layer.
///
/// Conjugate-pair layers are certified on their full realization, so every
/// pruned stored mode contributes two members to the tail (|T| counts members).
/// The grid maximum underestimates the true supremum; the bounds do not.
struct CertificateReport {
  std::string layer;
  int pruned_modes = 0;    // stored units
  int pruned_members = 0;  // realized modes, |T|
  double energy_tail = 0.0;
  double rho = 0.0;
  double kappa = 1.0;
  double bound_sum_roots = 0.0;
  double bound_root_sum = 0.0;
  double bound = 0.0;
  double last_style_bound = 0.0;
  double empirical_hinf = 0.0;
  int grid_points = 0;
};

struct CertifyOptions {
  int grid_points = 0;  // 0 selects default_grid_points(rho) per layer
};

std::vector<CertificateReport> certify(const ModelStack& stack, const PruneDecision& decision,
                                       const CertifyOptions& opts = {});

/// Certificate for an explicit pruned set of one layer.
CertificateReport certify_layer(const DiagonalLayer& layer, std::span<const int> pruned,
                                const CertifyOptions& opts = {});

/// Conservative end-to-end bound for a residual stack x -> sigma_l(x + G_l x)
/// with sigma_l(0) = 0 and Lipschitz constant L_l, composed by telescoping:
///   sum_l [prod_{m>l} L_m (1 + g~_m)] L_l eps_l [prod_{m<l} L_m (1 + g_m)],
/// where g, g~ are peak-gain envelopes of the full and reduced layers and eps_l
/// the per-layer certificates. Result is per unit input norm.
struct StackBound {
  double bound = 0.0;
  std::vector<double> full_gain;
  std::vector<double> reduced_gain;
  std::vector<double> lipschitz;
};
StackBound compose_stack_bound(const ModelStack& stack, const PruneDecision& decision,
                               const std::vector<CertificateReport>& certs,
                               std::span<const double> lipschitz = {});

struct DistortionOptions {
  int horizon = 256;
  int grid_points = 0;
  int mc_steps = 0;  // 0 disables the Monte-Carlo power comparison
  int mc_trials = 8;
  std::uint64_t seed = 0;
};

struct LayerDistortion {
  std::string layer;
  double modal_drop = 0.0;
  double exact_h2 = 0.0;  // squared H2 norm of G - G~
  double impulse_rmse = 0.0;
  double empirical_hinf = 0.0;
  std::optional<double> mc_power_delta;
  std::optional<double> mc_std_error;
};

/// Distortion of pruning by `decision`; the difference system is exactly the
/// pruned modes.
std::vector<LayerDistortion> distortion(const ModelStack& full, const PruneDecision& decision,
                                        const DistortionOptions& opts = {});

/// Distortion against an already reduced model, matched by layer name. Layers
/// missing from `reduced` count as fully removed.
std::vector<LayerDistortion> distortion(const ModelStack& full, const ModelStack& reduced,
                                        const DistortionOptions& opts = {});

/// G - G~ realized as one diagonal layer. Reduced modes that are bit-identical
/// to a full mode cancel it; the rest follow the unmatched full modes with
/// negated output couplings.
DiagonalLayer difference_layer(const DiagonalLayer& full, const DiagonalLayer* reduced);

struct SweepRow {
  double ratio = 0.0;
  double achieved_ratio = 0.0;
  int kept_modes = 0;
  int total_modes = 0;
  double tau = 0.0;
  double modal_drop = 0.0;
  double exact_h2 = 0.0;
  double empirical_hinf = 0.0;  // max over layers
  double bound = 0.0;           // max over layers
  double last_style_bound = 0.0;
  std::vector<std::pair<std::string, double>> kept_fraction;
};

struct SweepOptions {
  double epsilon = kDefaultEpsilon;
  std::uint64_t seed = 0;
  int layer_floor = 0;
  int horizon = 256;
  int grid_points = 0;
};

std::vector<SweepRow> sweep(const ModelStack& stack, Method method, Scope scope,
                            std::span<const double> ratios, const SweepOptions& opts = {});

}  // namespace ssmprune
