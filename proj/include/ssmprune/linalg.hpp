#pragma once

#include "ssmprune/model.hpp"

namespace ssmprune {

/// Largest singular value of a small dense complex matrix by power iteration
/// on M^* M. Iterates until the relative change of the estimate drops below tol.
double spectral_norm(const CMatrix& m, double tol = 1e-10, int max_iter = 500);

/// Uniform grid w_k = 2 pi k / N, k = 0..N-1.
std::vector<double> uniform_frequency_grid(int num_points);

}  // namespace ssmprune
