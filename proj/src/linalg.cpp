#include "ssmprune/linalg.hpp"

#include <cmath>
#include <numbers>

namespace ssmprune {

double spectral_norm(const CMatrix& m, double tol, int max_iter) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();

  const CMatrix gram = m.adjoint() * m;
  Eigen::Index best = 0;
  gram.colwise().norm().maxCoeff(&best);
  CVector v = gram.col(best);
  double nv = v.norm();
  if (nv == 0.0) return 0.0;
  v /= nv;

  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    CVector w = gram * v;
    const double rayleigh = std::real(v.dot(w));
    const double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    if (it > 0 && std::abs(rayleigh - estimate) <= tol * std::abs(rayleigh)) {
      estimate = rayleigh;
      break;
    }
    estimate = rayleigh;
  }
  return std::sqrt(std::max(estimate, 0.0));
}

std::vector<double> uniform_frequency_grid(int num_points) {
  std::vector<double> grid(static_cast<std::size_t>(std::max(num_points, 0)));
  for (int k = 0; k < num_points; ++k) {
    grid[k] = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_points);
  }
  return grid;
}

}  // namespace ssmprune
