#include "ssmprune/energy.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include "ssmprune/rng.hpp"

namespace ssmprune {

namespace {

void check_index(const DiagonalLayer& layer, int i, const char* op) {
  if (i < 0 || i >= layer.n()) {
    throw std::out_of_range(std::string(op) + ": mode index " + std::to_string(i) +
                            " out of range for layer '" + layer.name + "' (n = " +
                            std::to_string(layer.n()) + ")");
  }
}

double stable_pole_mag(const DiagonalLayer& layer, int i, const char* op) {
  if (layer.time_domain != TimeDomain::discrete) {
    throw std::invalid_argument(std::string(op) + ": layer '" + layer.name +
                                "' is continuous-time; discretize first");
  }
  const double mag = std::abs(layer.lambda(i));
  if (!(mag < 1.0)) {
    throw std::domain_error(std::string(op) + ": |lambda| = " + std::to_string(mag) +
                            " >= 1 at index " + std::to_string(i) + " of layer '" + layer.name +
                            "'; energy diverges");
  }
  return mag;
}

}  // namespace

double output_norm_sq(const DiagonalLayer& layer, int i, OutputCombine combine) {
  check_index(layer, i, "output_norm_sq");
  const double fwd = layer.C.col(i).squaredNorm();
  if (!layer.C_bwd) return fwd;
  const double bwd = layer.C_bwd->col(i).squaredNorm();
  return combine == OutputCombine::average ? 0.5 * (fwd + bwd) : fwd + bwd;
}

double coupling_sq(const DiagonalLayer& layer, int i, OutputCombine combine) {
  return output_norm_sq(layer, i, combine) * layer.B.row(i).squaredNorm();
}

double mode_energy_finite(const DiagonalLayer& layer, int i, int horizon) {
  check_index(layer, i, "mode_energy_finite");
  if (horizon < 1) throw std::invalid_argument("mode_energy_finite: horizon must be >= 1");
  const double mag = stable_pole_mag(layer, i, "mode_energy_finite");
  const double r2 = mag * mag;
  // (1 - r^{2T}) / (1 - r^2)
  const double log_r2 = std::log(r2);
  const double geom = r2 == 0.0 ? 1.0 : std::expm1(horizon * log_r2) / std::expm1(log_r2);
  const int mult = layer.conjugate_pairs ? 2 : 1;
  return mult * coupling_sq(layer, i) * geom;
}

ModeEnergy mode_energy(const DiagonalLayer& layer, int i) {
  check_index(layer, i, "mode_energy");
  const double mag = stable_pole_mag(layer, i, "mode_energy");
  ModeEnergy e;
  e.layer = layer.name;
  e.index = i;
  e.pole_mag = mag;
  e.multiplicity = layer.conjugate_pairs ? 2 : 1;
  const double a2 = coupling_sq(layer, i);
  e.alpha = std::sqrt(a2);
  e.E = e.multiplicity * a2 / (1.0 - mag * mag);
  return e;
}

std::vector<ModeEnergy> mode_energies(const DiagonalLayer& layer) {
  std::vector<ModeEnergy> out;
  out.reserve(layer.n());
  for (int i = 0; i < layer.n(); ++i) out.push_back(mode_energy(layer, i));
  return out;
}

double layer_energy_modal(const DiagonalLayer& layer) {
  double total = 0.0;
  for (int i = 0; i < layer.n(); ++i) total += mode_energy(layer, i).E;
  return total;
}

double layer_energy_exact(const DiagonalLayer& layer, Direction dir) {
  const DiagonalLayer full = expand_conjugate_pairs(layer);
  const int n = full.n();
  for (int i = 0; i < n; ++i) stable_pole_mag(full, i, "layer_energy_exact");
  const CMatrix& C = full.output(dir);
  const CMatrix ctc = C.adjoint() * C;           // (C^* C)_{ij} = <C_i, C_j>
  const CMatrix bbh = full.B * full.B.adjoint();  // (B B^*)_{ji}
  cdouble total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cdouble denom = 1.0 - std::conj(full.lambda(i)) * full.lambda(j);
      total += ctc(i, j) * bbh(j, i) / denom;
    }
  }
  return std::max(total.real(), 0.0);
}

double layer_energy_exact(const DiagonalLayer& layer) {
  if (!layer.bidirectional()) return layer_energy_exact(layer, Direction::forward);
  return 0.5 * (layer_energy_exact(layer, Direction::forward) +
                layer_energy_exact(layer, Direction::backward));
}

PowerEstimate white_noise_power(const DiagonalLayer& layer, int num_steps, int num_trials,
                                std::uint64_t seed) {
  if (num_steps < 1 || num_trials < 1) {
    throw std::invalid_argument("white_noise_power: num_steps and num_trials must be >= 1");
  }
  const DiagonalLayer full = expand_conjugate_pairs(layer);
  const int n = full.n();
  const int h = full.h();
  double max_mag = 0.0;
  for (int i = 0; i < n; ++i) max_mag = std::max(max_mag, stable_pole_mag(full, i, "white_noise_power"));

  PowerEstimate est;
  est.burn_in = 10 * static_cast<int>(std::ceil(1.0 / (1.0 - max_mag)));
  est.num_steps = num_steps;
  est.num_trials = num_trials;

  auto run_trial = [&](int trial) {
    Rng rng(seed + static_cast<std::uint64_t>(trial));
    CVector x = CVector::Zero(n);
    Eigen::VectorXd u(h);
    double acc = 0.0;
    const int total = est.burn_in + num_steps;
    for (int k = 0; k < total; ++k) {
      if (k >= est.burn_in) {
        double p = (full.C * x).squaredNorm();
        if (full.C_bwd) p = 0.5 * (p + (*full.C_bwd * x).squaredNorm());
        acc += p;
      }
      for (int c = 0; c < h; ++c) u(c) = rng.normal();
      x = full.lambda.cwiseProduct(x) + full.B * u.cast<cdouble>();
    }
    return acc / num_steps;
  };

  std::vector<std::future<double>> futures;
  futures.reserve(num_trials);
  for (int t = 0; t < num_trials; ++t) futures.push_back(std::async(std::launch::async, run_trial, t));
  std::vector<double> powers;
  powers.reserve(num_trials);
  for (auto& f : futures) powers.push_back(f.get());

  double mean = 0.0;
  for (double p : powers) mean += p;
  mean /= num_trials;
  double var = 0.0;
  for (double p : powers) var += (p - mean) * (p - mean);
  est.mean = mean;
  est.std_error = num_trials > 1 ? std::sqrt(var / (num_trials - 1) / num_trials) : 0.0;
  return est;
}

}  // namespace ssmprune
