#pragma once

#include <complex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ssmprune {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

enum class TimeDomain { continuous, discrete };
enum class Direction { forward, backward };

/// Thrown when a model, decision or argument violates a documented invariant.
/// Carries one human-readable line per violation.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  ValidationError(const std::string& context, std::vector<std::string> violations);

  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// One diagonal LTI layer stored as modal triplets (lambda_i, B row i, C column i).
///
/// For discrete layers the dynamics are x_{k+1} = diag(lambda) x_k + B u_k and
/// y_k = C x_k. The feedthrough D is carried for interchange fidelity only and
/// is never used by response, energy or certificate computations.
struct DiagonalLayer {
  std::string name;
  CVector lambda;                // n
  CMatrix B;                     // n x h
  CMatrix C;                     // h x n
  std::optional<CMatrix> C_bwd;  // h x n, bidirectional layers only
  std::optional<RVector> delta;  // n, continuous layers only
  std::optional<CMatrix> D;      // h x h, carried but never scored
  TimeDomain time_domain = TimeDomain::discrete;
  bool conjugate_pairs = false;

  int n() const { return static_cast<int>(lambda.size()); }
  int h() const { return static_cast<int>(B.cols()); }
  bool bidirectional() const { return C_bwd.has_value(); }

  /// Output coupling for the requested direction. Throws for backward on a
  /// unidirectional layer.
  const CMatrix& output(Direction dir) const;
};

struct ModelStack {
  std::vector<DiagonalLayer> layers;
  std::string format_version = "1";
  // Set by exporters that could only produce a static surrogate of the model.
  bool approximate = false;

  int num_layers() const { return static_cast<int>(layers.size()); }
  int total_modes() const;
};

struct ImpulseSlice {
  int t = 0;
  CMatrix H;  // h x h
};

/// Empty iff every layer invariant holds. Each entry names the field, index and bound.
std::vector<std::string> validate_layer(const DiagonalLayer& layer);
std::vector<std::string> validate_stack(const ModelStack& stack);

/// Throws ValidationError listing every violation (no-op on a valid stack).
void require_valid(const ModelStack& stack);
void require_valid(const DiagonalLayer& layer);

/// |lambda * delta| below this uses the delta * B limit of the ZOH input map.
inline constexpr double kZohZeroPoleGuard = 1e-12;

DiagonalLayer discretize_zoh(const DiagonalLayer& layer);
ModelStack discretize_zoh(const ModelStack& stack);

/// Full realization of a conjugate-pair layer: appends conj(lambda), conj(B rows)
/// and conj(C columns). Layers without conjugate_pairs are returned unchanged.
/// Mode i and its conjugate end up at indices i and n + i.
DiagonalLayer expand_conjugate_pairs(const DiagonalLayer& layer);

/// H_t = C diag(lambda)^t B for t = 0..T-1, over the stored modes.
std::vector<ImpulseSlice> impulse_response(const DiagonalLayer& layer, int horizon,
                                           Direction dir = Direction::forward);

/// G(e^{jw}) = sum_i C_{:,i} B_{i,:} / (1 - lambda_i e^{-jw}) at each w.
std::vector<CMatrix> frequency_response(const DiagonalLayer& layer,
                                        std::span<const double> omegas,
                                        Direction dir = Direction::forward);

/// Recursion form: y_k = C x_k, x_{k+1} = diag(lambda) x_k + B u_k.
/// u is T x h (one row per step); x0 defaults to zero. Returns T x h.
CMatrix simulate(const DiagonalLayer& layer, const CMatrix& u,
                 const std::optional<CVector>& x0 = std::nullopt,
                 Direction dir = Direction::forward);

/// Aligned convolution form: y_k = sum_{j<=k} H_j u_{k-j}. Agrees with
/// simulate() under a one-step shift when x0 = 0.
CMatrix simulate_convolution(const DiagonalLayer& layer, const CMatrix& u,
                             Direction dir = Direction::forward);

/// Runs the linear cores of a stack in sequence. With residual = true each
/// layer maps u to u + y, so a removed layer acts as the identity.
CMatrix simulate_stack(const ModelStack& stack, const CMatrix& u, bool residual);

/// Layer with only the listed modes (in the given order).
DiagonalLayer select_modes(const DiagonalLayer& layer, std::span<const int> indices);

/// Same shapes as layer; B rows and C (and C_bwd) columns of the listed modes set to zero.
DiagonalLayer mask_modes(const DiagonalLayer& layer, std::span<const int> indices);

std::string to_string(TimeDomain d);
TimeDomain time_domain_from_string(const std::string& s);

}  // namespace ssmprune
