#pragma once

#include <cstdint>

#include "ssmprune/model.hpp"

namespace ssmprune {

/// Infinite-horizon impulse-response energy of one stored mode.
///
/// `alpha` is the coupling gain ||C_{:,i}|| ||B_{i,:}|| of a single realized
/// mode (bidirectional layers use the root of the averaged squared output
/// norms). `multiplicity` is 2 for conjugate-pair layers, where the stored mode
/// also stands for its conjugate, so E = multiplicity * alpha^2 / (1 - |lambda|^2).
struct ModeEnergy {
  std::string layer;
  int index = 0;
  double E = 0.0;
  double alpha = 0.0;
  double pole_mag = 0.0;
  int multiplicity = 1;
};

/// How forward and backward output norms combine on bidirectional layers.
enum class OutputCombine { average, sum };

/// ||C_{:,i}||^2, or the combined forward/backward value on bidirectional layers.
double output_norm_sq(const DiagonalLayer& layer, int i,
                      OutputCombine combine = OutputCombine::average);

/// alpha_i^2 = ||C_{:,i}||^2 ||B_{i,:}||^2 for one realized mode.
double coupling_sq(const DiagonalLayer& layer, int i,
                   OutputCombine combine = OutputCombine::average);

/// Sum_{t<T} ||H_t^{(i)}||_F^2 in closed form (geometric series).
double mode_energy_finite(const DiagonalLayer& layer, int i, int horizon);

ModeEnergy mode_energy(const DiagonalLayer& layer, int i);
std::vector<ModeEnergy> mode_energies(const DiagonalLayer& layer);

/// Additive approximation sum_i E_i of the layer energy.
double layer_energy_modal(const DiagonalLayer& layer);

/// Exact squared H2 norm, cross-mode terms included:
///   sum_{i,j} (C^*C)_{ij} (B B^*)_{ji} / (1 - conj(lambda_i) lambda_j).
/// Conjugate-pair layers are expanded to their full realization first.
/// Bidirectional layers average the exact energies of the two directions.
double layer_energy_exact(const DiagonalLayer& layer);
double layer_energy_exact(const DiagonalLayer& layer, Direction dir);

struct PowerEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int burn_in = 0;
  int num_steps = 0;
  int num_trials = 0;
};

/// Monte-Carlo estimate of the steady-state output power E||y_k||^2 under unit
/// real white noise. Trial t draws from seed + t; the first
/// 10 * ceil(1 / (1 - max|lambda|)) steps are discarded as transient.
PowerEstimate white_noise_power(const DiagonalLayer& layer, int num_steps, int num_trials,
                                std::uint64_t seed);

}  // namespace ssmprune
