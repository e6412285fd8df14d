#include "ssmprune/model.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace ssmprune {

namespace {

std::string join_lines(const std::string& context, const std::vector<std::string>& lines) {
  std::ostringstream os;
  os << context;
  for (const auto& l : lines) os << "\n  " << l;
  return os.str();
}

constexpr double kMaxPoleMagnitude = 1.0 - 1e-12;

template <typename M>
void check_finite(const M& m, const std::string& field, std::vector<std::string>& out) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      const auto v = m(r, c);
      bool finite;
      if constexpr (std::is_same_v<std::decay_t<decltype(v)>, cdouble>) {
        finite = std::isfinite(v.real()) && std::isfinite(v.imag());
      } else {
        finite = std::isfinite(v);
      }
      if (!finite) {
        std::ostringstream os;
        os << field << ": non-finite value at (" << r << ", " << c << ")";
        out.push_back(os.str());
      }
    }
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : ValidationError("validation failed", std::move(violations)) {}

ValidationError::ValidationError(const std::string& context, std::vector<std::string> violations)
    : std::runtime_error(join_lines(context, violations)), violations_(std::move(violations)) {}

const CMatrix& DiagonalLayer::output(Direction dir) const {
  if (dir == Direction::forward) return C;
  if (!C_bwd) throw std::invalid_argument("layer '" + name + "' has no backward output coupling");
  return *C_bwd;
}

int ModelStack::total_modes() const {
  int total = 0;
  for (const auto& l : layers) total += l.n();
  return total;
}

std::vector<std::string> validate_layer(const DiagonalLayer& layer) {
  std::vector<std::string> out;
  const auto n = layer.lambda.size();
  const auto h = layer.B.cols();
  auto prefix = [&](const std::string& s) { return "layer '" + layer.name + "': " + s; };

  if (layer.name.empty()) out.push_back(prefix("name is empty"));
  if (n < 1) out.push_back(prefix("n must be positive, got " + std::to_string(n)));
  if (h < 1) out.push_back(prefix("h must be positive, got " + std::to_string(h)));
  if (layer.B.rows() != n) {
    out.push_back(prefix("B has " + std::to_string(layer.B.rows()) + " rows, expected n = " +
                         std::to_string(n)));
  }
  if (layer.C.rows() != h || layer.C.cols() != n) {
    out.push_back(prefix("C has shape " + std::to_string(layer.C.rows()) + "x" +
                         std::to_string(layer.C.cols()) + ", expected " + std::to_string(h) + "x" +
                         std::to_string(n)));
  }
  if (layer.C_bwd && (layer.C_bwd->rows() != h || layer.C_bwd->cols() != n)) {
    out.push_back(prefix("C_bwd has shape " + std::to_string(layer.C_bwd->rows()) + "x" +
                         std::to_string(layer.C_bwd->cols()) + ", expected " + std::to_string(h) +
                         "x" + std::to_string(n)));
  }
  if (layer.D && (layer.D->rows() != h || layer.D->cols() != h)) {
    out.push_back(prefix("D must be " + std::to_string(h) + "x" + std::to_string(h)));
  }

  const bool continuous = layer.time_domain == TimeDomain::continuous;
  if (continuous && !layer.delta) out.push_back(prefix("continuous layer is missing delta"));
  if (!continuous && layer.delta) out.push_back(prefix("discrete layer must not carry delta"));
  if (layer.delta) {
    if (layer.delta->size() != n) {
      out.push_back(prefix("delta has " + std::to_string(layer.delta->size()) +
                           " entries, expected n = " + std::to_string(n)));
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d = (*layer.delta)(i);
        if (!(d > 0.0) || !std::isfinite(d)) {
          out.push_back(prefix("delta must be positive and finite at index " + std::to_string(i)));
        }
      }
    }
  }

  check_finite(layer.lambda, prefix("lambda"), out);
  check_finite(layer.B, prefix("B"), out);
  check_finite(layer.C, prefix("C"), out);
  if (layer.C_bwd) check_finite(*layer.C_bwd, prefix("C_bwd"), out);
  if (layer.D) check_finite(*layer.D, prefix("D"), out);

  for (Eigen::Index i = 0; i < n; ++i) {
    const cdouble lam = layer.lambda(i);
    if (!std::isfinite(lam.real()) || !std::isfinite(lam.imag())) continue;
    std::ostringstream os;
    if (continuous) {
      if (lam.real() >= 0.0) {
        os << "Re(lambda) >= 0 at index " << i << " (lambda = " << lam.real() << "+" << lam.imag()
           << "j)";
        out.push_back(prefix(os.str()));
      }
    } else {
      const double mag = std::abs(lam);
      if (mag >= 1.0) {
        os << "pole magnitude >= 1 at index " << i << " (|lambda| = " << mag << ")";
        out.push_back(prefix(os.str()));
      } else if (mag > kMaxPoleMagnitude) {
        os << "pole magnitude exceeds 1 - 1e-12 at index " << i << " (|lambda| = " << mag << ")";
        out.push_back(prefix(os.str()));
      }
    }
  }
  return out;
}

std::vector<std::string> validate_stack(const ModelStack& stack) {
  std::vector<std::string> out;
  if (stack.layers.empty()) out.push_back("stack has no layers");
  std::set<std::string> names;
  for (const auto& layer : stack.layers) {
    if (!names.insert(layer.name).second) out.push_back("duplicate layer name '" + layer.name + "'");
    auto v = validate_layer(layer);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

void require_valid(const ModelStack& stack) {
  auto v = validate_stack(stack);
  if (!v.empty()) throw ValidationError("invalid model", std::move(v));
}

void require_valid(const DiagonalLayer& layer) {
  auto v = validate_layer(layer);
  if (!v.empty()) throw ValidationError("invalid layer", std::move(v));
}

DiagonalLayer discretize_zoh(const DiagonalLayer& layer) {
  if (layer.time_domain != TimeDomain::continuous) {
    throw std::invalid_argument("discretize_zoh: layer '" + layer.name + "' is already discrete");
  }
  require_valid(layer);

  DiagonalLayer out = layer;
  out.time_domain = TimeDomain::discrete;
  out.delta.reset();
  const auto& delta = *layer.delta;
  for (int i = 0; i < layer.n(); ++i) {
    const cdouble lam = layer.lambda(i);
    const double dt = delta(i);
    const cdouble lam_d = std::exp(lam * dt);
    cdouble gain;
    if (std::abs(lam * dt) < kZohZeroPoleGuard) {
      gain = dt;
    } else {
      gain = (lam_d - 1.0) / lam;
    }
    out.lambda(i) = lam_d;
    out.B.row(i) = layer.B.row(i) * gain;
  }
  std::vector<std::string> v;
  for (int i = 0; i < out.n(); ++i) {
    if (!(std::abs(out.lambda(i)) < 1.0)) {
      v.push_back("layer '" + layer.name + "': discretized pole magnitude >= 1 at index " +
                  std::to_string(i));
    }
  }
  if (!v.empty()) throw ValidationError("discretization left layer '" + layer.name + "' unstable", v);
  return out;
}

ModelStack discretize_zoh(const ModelStack& stack) {
  ModelStack out = stack;
  for (auto& layer : out.layers) {
    if (layer.time_domain == TimeDomain::continuous) layer = discretize_zoh(layer);
  }
  return out;
}

DiagonalLayer expand_conjugate_pairs(const DiagonalLayer& layer) {
  if (!layer.conjugate_pairs) return layer;
  const int n = layer.n();
  const int h = layer.h();
  DiagonalLayer out = layer;
  out.conjugate_pairs = false;
  out.lambda.resize(2 * n);
  out.lambda << layer.lambda, layer.lambda.conjugate();
  out.B.resize(2 * n, h);
  out.B << layer.B, layer.B.conjugate();
  out.C.resize(h, 2 * n);
  out.C << layer.C, layer.C.conjugate();
  if (layer.C_bwd) {
    CMatrix cb(h, 2 * n);
    cb << *layer.C_bwd, layer.C_bwd->conjugate();
    out.C_bwd = std::move(cb);
  }
  if (layer.delta) {
    RVector d(2 * n);
    d << *layer.delta, *layer.delta;
    out.delta = std::move(d);
  }
  return out;
}

namespace {

void require_discrete(const DiagonalLayer& layer, const char* op) {
  if (layer.time_domain != TimeDomain::discrete) {
    throw std::invalid_argument(std::string(op) + ": layer '" + layer.name +
                                "' is continuous-time; discretize first");
  }
}

}  // namespace

std::vector<ImpulseSlice> impulse_response(const DiagonalLayer& layer, int horizon, Direction dir) {
  require_discrete(layer, "impulse_response");
  if (horizon < 1) throw std::invalid_argument("impulse_response: horizon must be >= 1");
  const int n = layer.n();
  const int h = layer.h();
  const CMatrix& C = layer.output(dir);

  std::vector<ImpulseSlice> out;
  out.reserve(horizon);
  CVector power = CVector::Ones(n);
  for (int t = 0; t < horizon; ++t) {
    CMatrix H = CMatrix::Zero(h, h);
    for (int i = 0; i < n; ++i) {
      if (power(i) == cdouble(0.0)) continue;
      H.noalias() += (C.col(i) * power(i)) * layer.B.row(i);
    }
    out.push_back({t, std::move(H)});
    power = power.cwiseProduct(layer.lambda);
  }
  return out;
}

std::vector<CMatrix> frequency_response(const DiagonalLayer& layer, std::span<const double> omegas,
                                        Direction dir) {
  require_discrete(layer, "frequency_response");
  const int n = layer.n();
  const int h = layer.h();
  const CMatrix& C = layer.output(dir);

  std::vector<CMatrix> out;
  out.reserve(omegas.size());
  for (double w : omegas) {
    const cdouble z_inv = std::polar(1.0, -w);
    CMatrix G = CMatrix::Zero(h, h);
    for (int i = 0; i < n; ++i) {
      const cdouble scale = 1.0 / (1.0 - layer.lambda(i) * z_inv);
      G.noalias() += (C.col(i) * scale) * layer.B.row(i);
    }
    out.push_back(std::move(G));
  }
  return out;
}

CMatrix simulate(const DiagonalLayer& layer, const CMatrix& u, const std::optional<CVector>& x0,
                 Direction dir) {
  require_discrete(layer, "simulate");
  const int n = layer.n();
  const int h = layer.h();
  if (u.cols() != h) {
    throw std::invalid_argument("simulate: input has " + std::to_string(u.cols()) +
                                " channels, layer '" + layer.name + "' expects " +
                                std::to_string(h));
  }
  if (x0 && x0->size() != n) {
    throw std::invalid_argument("simulate: x0 has " + std::to_string(x0->size()) +
                                " entries, expected " + std::to_string(n));
  }
  const CMatrix& C = layer.output(dir);
  const auto steps = u.rows();

  CVector x = x0 ? *x0 : CVector::Zero(n);
  CMatrix y(steps, h);
  for (Eigen::Index k = 0; k < steps; ++k) {
    for (int c = 0; c < h; ++c) {
      cdouble acc = 0.0;
      for (int i = 0; i < n; ++i) acc += C(c, i) * x(i);
      y(k, c) = acc;
    }
    for (int i = 0; i < n; ++i) {
      cdouble drive = 0.0;
      for (int c = 0; c < h; ++c) drive += layer.B(i, c) * u(k, c);
      x(i) = layer.lambda(i) * x(i) + drive;
    }
  }
  return y;
}

CMatrix simulate_convolution(const DiagonalLayer& layer, const CMatrix& u, Direction dir) {
  require_discrete(layer, "simulate_convolution");
  const int h = layer.h();
  if (u.cols() != h) throw std::invalid_argument("simulate_convolution: channel mismatch");
  const auto steps = static_cast<int>(u.rows());
  CMatrix y = CMatrix::Zero(steps, h);
  if (steps == 0) return y;
  const auto kernel = impulse_response(layer, steps, dir);
  for (int k = 0; k < steps; ++k) {
    for (int j = 0; j <= k; ++j) {
      y.row(k).noalias() += (kernel[j].H * u.row(k - j).transpose()).transpose();
    }
  }
  return y;
}

CMatrix simulate_stack(const ModelStack& stack, const CMatrix& u, bool residual) {
  CMatrix signal = u;
  for (const auto& layer : stack.layers) {
    CMatrix y = simulate(layer, signal);
    signal = residual ? CMatrix(signal + y) : y;
  }
  return signal;
}

DiagonalLayer select_modes(const DiagonalLayer& layer, std::span<const int> indices) {
  const int n = layer.n();
  const int h = layer.h();
  const int m = static_cast<int>(indices.size());
  for (int idx : indices) {
    if (idx < 0 || idx >= n) {
      throw std::out_of_range("select_modes: index " + std::to_string(idx) +
                              " out of range for layer '" + layer.name + "'");
    }
  }
  DiagonalLayer out;
  out.name = layer.name;
  out.time_domain = layer.time_domain;
  out.conjugate_pairs = layer.conjugate_pairs;
  out.D = layer.D;
  out.lambda.resize(m);
  out.B.resize(m, h);
  out.C.resize(h, m);
  if (layer.C_bwd) out.C_bwd = CMatrix(h, m);
  if (layer.delta) out.delta = RVector(m);
  for (int k = 0; k < m; ++k) {
    const int i = indices[k];
    out.lambda(k) = layer.lambda(i);
    out.B.row(k) = layer.B.row(i);
    out.C.col(k) = layer.C.col(i);
    if (layer.C_bwd) out.C_bwd->col(k) = layer.C_bwd->col(i);
    if (layer.delta) (*out.delta)(k) = (*layer.delta)(i);
  }
  return out;
}

DiagonalLayer mask_modes(const DiagonalLayer& layer, std::span<const int> indices) {
  DiagonalLayer out = layer;
  for (int i : indices) {
    if (i < 0 || i >= layer.n()) throw std::out_of_range("mask_modes: index out of range");
    out.B.row(i).setZero();
    out.C.col(i).setZero();
    if (out.C_bwd) out.C_bwd->col(i).setZero();
  }
  return out;
}

std::string to_string(TimeDomain d) {
  return d == TimeDomain::continuous ? "continuous" : "discrete";
}

TimeDomain time_domain_from_string(const std::string& s) {
  if (s == "continuous") return TimeDomain::continuous;
  if (s == "discrete") return TimeDomain::discrete;
  throw std::invalid_argument("unknown time_domain '" + s + "'");
}

}  // namespace ssmprune
