#pragma once

#include <cstdint>

#include "ssmprune/model.hpp"

namespace ssmprune {

enum class Structure { mimo, multi_siso };

struct SynthOptions {
  std::uint64_t seed = 0;
  int num_layers = 2;
  std::vector<int> modes{8};  // one entry for all layers, or one per layer
  int channels = 2;
  double radius_min = 0.5;  // discrete pole radius range, within [0, 1)
  double radius_max = 0.95;
  Structure structure = Structure::mimo;
  bool conjugate_pairs = false;
  bool bidirectional = false;
  // Per-mode output gains are exp(spread * N(0, 1)); > 0 gives heavy-tailed energies.
  double coupling_spread = 0.0;
  // Emit continuous-time parameters whose ZOH discretization has the requested radii.
  bool continuous = false;
};

/// Deterministic random stable model. multi_siso places each mode on its own
/// (input channel, output channel) pair, so no two modes share support and the
/// modal energy sum is exact; this needs modes <= channels^2 and no conjugate pairs.
ModelStack synth(const SynthOptions& opts);

std::string to_string(Structure s);
Structure structure_from_string(const std::string& s);

}  // namespace ssmprune
