#include "ssmprune/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace ssmprune {

namespace {

json num(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double get_num(const json& j, double if_null) {
  if (j.is_null()) return if_null;
  if (!j.is_number()) throw ValidationError("malformed file", {"expected a number, got " + j.dump()});
  return j.get<double>();
}

template <typename T>
T require_field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ValidationError("malformed file", {where + ": missing field '" + key + "'"});
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError("malformed file", {where + ": field '" + key + "' has the wrong type"});
  }
}

std::uint64_t to_little_endian(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xffu) << (8 * (7 - b));
    return r;
  }
  return v;
}

std::string encode_f64(const std::vector<double>& values) {
  std::string bytes(values.size() * 8, '\0');
  for (std::size_t k = 0; k < values.size(); ++k) {
    const std::uint64_t bits = to_little_endian(std::bit_cast<std::uint64_t>(values[k]));
    std::memcpy(bytes.data() + 8 * k, &bits, 8);
  }
  return bytes;
}

std::vector<double> decode_f64(const std::string& bytes) {
  std::vector<double> out(bytes.size() / 8);
  for (std::size_t k = 0; k < out.size(); ++k) {
    std::uint64_t bits;
    std::memcpy(&bits, bytes.data() + 8 * k, 8);
    out[k] = std::bit_cast<double>(to_little_endian(bits));
  }
  return out;
}

std::string read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return ss.str();
}

void write_bytes_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("error while writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp.string() + "' to '" + path.string() + "': " + ec.message());
}

// ---- model arrays ---------------------------------------------------------

struct ArrayReader {
  fs::path base;
  std::string layer;
  std::vector<std::string>* problems;

  // Returns nullopt (and records a problem) on a missing or misshapen array.
  std::optional<std::vector<double>> read(const json& arrays, const std::string& name,
                                          const std::vector<std::int64_t>& shape, bool required) {
    const std::string where = "layer '" + layer + "', array '" + name + "'";
    if (!arrays.contains(name)) {
      if (required) problems->push_back(where + ": missing");
      return std::nullopt;
    }
    const json& rec = arrays.at(name);
    if (rec.contains("dtype") && rec.at("dtype") != "f64") {
      problems->push_back(where + ": dtype must be f64");
      return std::nullopt;
    }
    std::vector<std::int64_t> got;
    try {
      got = rec.at("shape").get<std::vector<std::int64_t>>();
    } catch (const json::exception&) {
      problems->push_back(where + ": missing or malformed shape");
      return std::nullopt;
    }
    if (got != shape) {
      std::ostringstream os;
      os << where << ": shape mismatch, manifest says [";
      for (std::size_t k = 0; k < got.size(); ++k) os << (k ? "," : "") << got[k];
      os << "], layer dimensions require [";
      for (std::size_t k = 0; k < shape.size(); ++k) os << (k ? "," : "") << shape[k];
      os << "]";
      problems->push_back(os.str());
      return std::nullopt;
    }
    std::size_t count = 1;
    for (auto d : shape) count *= static_cast<std::size_t>(d);

    std::vector<double> values;
    if (rec.contains("values")) {
      const json& v = rec.at("values");
      if (!v.is_array()) {
        problems->push_back(where + ": inline values must be an array");
        return std::nullopt;
      }
      for (const auto& x : v) {
        if (x.is_number()) {
          values.push_back(x.get<double>());
        } else {
          // null marks a value JSON cannot represent (NaN/inf); rejected below.
          values.push_back(std::numeric_limits<double>::quiet_NaN());
        }
      }
    } else if (rec.contains("path")) {
      const fs::path file = base / rec.at("path").get<std::string>();
      const std::string bytes = read_bytes(file);
      if (bytes.size() != count * 8) {
        problems->push_back(where + ": file '" + file.string() + "' has " +
                            std::to_string(bytes.size()) + " bytes, expected " +
                            std::to_string(count * 8));
        return std::nullopt;
      }
      values = decode_f64(bytes);
    } else {
      problems->push_back(where + ": needs either 'path' or 'values'");
      return std::nullopt;
    }
    if (values.size() != count) {
      problems->push_back(where + ": has " + std::to_string(values.size()) + " values, expected " +
                          std::to_string(count));
      return std::nullopt;
    }
    return values;
  }
};

std::optional<CMatrix> complex_matrix(const std::optional<std::vector<double>>& re,
                                      const std::optional<std::vector<double>>& im, Eigen::Index rows,
                                      Eigen::Index cols) {
  if (!re || !im) return std::nullopt;
  CMatrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto k = static_cast<std::size_t>(r * cols + c);
      m(r, c) = cdouble((*re)[k], (*im)[k]);
    }
  }
  return m;
}

void split(const CMatrix& m, std::vector<double>& re, std::vector<double>& im) {
  re.clear();
  im.clear();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  }
}

}  // namespace

json read_json(const fs::path& path) {
  const std::string text = read_bytes(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  write_bytes_atomic(path, text);
}

void write_json(const fs::path& path, const json& j) { write_text_atomic(path, j.dump(2) + "\n"); }

ModelStack load_model(const fs::path& path, const LoadOptions& opts,
                      std::vector<std::string>* warnings) {
  const fs::path manifest_path = fs::is_directory(path) ? path / kManifestName : path;
  const fs::path base = manifest_path.parent_path();
  const json manifest = read_json(manifest_path);

  std::vector<std::string> problems;
  const std::string version = require_field<std::string>(manifest, "format_version", "manifest");
  if (version != kFormatVersion) {
    throw ValidationError("unsupported model", {"format_version '" + version + "' is not supported"});
  }
  if (!manifest.contains("layers") || !manifest.at("layers").is_array()) {
    throw ValidationError("malformed manifest", {"'layers' must be an array"});
  }

  ModelStack stack;
  stack.format_version = version;
  stack.approximate = manifest.value("approximate", false);

  int idx = 0;
  for (const auto& rec : manifest.at("layers")) {
    const std::string where = "layers[" + std::to_string(idx++) + "]";
    DiagonalLayer layer;
    layer.name = require_field<std::string>(rec, "name", where);
    const auto n = require_field<std::int64_t>(rec, "n", where);
    const auto h = require_field<std::int64_t>(rec, "h", where);
    if (n < 1 || h < 1) {
      problems.push_back("layer '" + layer.name + "': n and h must be positive");
      continue;
    }
    try {
      layer.time_domain = time_domain_from_string(rec.value("time_domain", std::string("discrete")));
    } catch (const std::invalid_argument& e) {
      problems.push_back("layer '" + layer.name + "': " + e.what());
      continue;
    }
    layer.conjugate_pairs = rec.value("conjugate_pairs", false);
    const bool bidirectional = rec.value("bidirectional", false);
    if (!rec.contains("arrays") || !rec.at("arrays").is_object()) {
      problems.push_back("layer '" + layer.name + "': missing 'arrays'");
      continue;
    }
    const json& arrays = rec.at("arrays");
    ArrayReader reader{base, layer.name, &problems};
    const std::size_t before = problems.size();

    auto lre = reader.read(arrays, "lambda_re", {n}, true);
    auto lim = reader.read(arrays, "lambda_im", {n}, true);
    auto bre = reader.read(arrays, "B_re", {n, h}, true);
    auto bim = reader.read(arrays, "B_im", {n, h}, true);
    auto cre = reader.read(arrays, "C_re", {h, n}, true);
    auto cim = reader.read(arrays, "C_im", {h, n}, true);
    auto cbre = reader.read(arrays, "C_bwd_re", {h, n}, bidirectional);
    auto cbim = reader.read(arrays, "C_bwd_im", {h, n}, bidirectional);
    auto delta = reader.read(arrays, "delta", {n}, layer.time_domain == TimeDomain::continuous);
    auto dre = reader.read(arrays, "D_re", {h, h}, false);
    auto dim = reader.read(arrays, "D_im", {h, h}, false);
    if (!bidirectional && (cbre || cbim)) {
      problems.push_back("layer '" + layer.name + "': C_bwd given but bidirectional is false");
    }
    if (problems.size() != before) continue;

    layer.lambda = complex_matrix(lre, lim, n, 1)->col(0);
    layer.B = *complex_matrix(bre, bim, n, h);
    layer.C = *complex_matrix(cre, cim, h, n);
    if (bidirectional) layer.C_bwd = complex_matrix(cbre, cbim, h, n);
    if (delta) layer.delta = Eigen::Map<const RVector>(delta->data(), n);
    if (dre) {
      std::vector<double> zeros(static_cast<std::size_t>(h * h), 0.0);
      layer.D = complex_matrix(dre, dim ? dim : std::optional(zeros), h, h);
    }
    stack.layers.push_back(std::move(layer));
  }
  if (!problems.empty()) throw ValidationError("invalid model '" + path.string() + "'", problems);

  require_valid(stack);
  if (opts.discretize) {
    for (auto& layer : stack.layers) {
      if (layer.time_domain == TimeDomain::continuous) {
        layer = discretize_zoh(layer);
        if (warnings) warnings->push_back("layer '" + layer.name + "' is continuous-time; discretized with ZOH");
      }
    }
    require_valid(stack);
  }
  return stack;
}

void save_model(const ModelStack& stack, const fs::path& dir, bool inline_arrays) {
  require_valid(stack);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["approximate"] = stack.approximate;
  json layers = json::array();
  for (std::size_t l = 0; l < stack.layers.size(); ++l) {
    const auto& layer = stack.layers[l];
    const std::int64_t n = layer.n();
    const std::int64_t h = layer.h();
    json rec;
    rec["name"] = layer.name;
    rec["n"] = n;
    rec["h"] = h;
    rec["time_domain"] = to_string(layer.time_domain);
    rec["conjugate_pairs"] = layer.conjugate_pairs;
    rec["bidirectional"] = layer.bidirectional();
    json arrays = json::object();

    auto emit = [&](const std::string& name, const std::vector<double>& values,
                    std::vector<std::int64_t> shape) {
      json a;
      if (inline_arrays) {
        a["values"] = values;
      } else {
        const std::string file = "layer" + std::to_string(l) + "_" + name + ".bin";
        write_bytes_atomic(dir / file, encode_f64(values));
        a["path"] = file;
      }
      a["shape"] = shape;
      a["dtype"] = "f64";
      arrays[name] = std::move(a);
    };

    std::vector<double> re, im;
    split(layer.lambda, re, im);
    emit("lambda_re", re, {n});
    emit("lambda_im", im, {n});
    split(layer.B, re, im);
    emit("B_re", re, {n, h});
    emit("B_im", im, {n, h});
    split(layer.C, re, im);
    emit("C_re", re, {h, n});
    emit("C_im", im, {h, n});
    if (layer.C_bwd) {
      split(*layer.C_bwd, re, im);
      emit("C_bwd_re", re, {h, n});
      emit("C_bwd_im", im, {h, n});
    }
    if (layer.delta) {
      emit("delta", std::vector<double>(layer.delta->data(), layer.delta->data() + n), {n});
    }
    if (layer.D) {
      split(*layer.D, re, im);
      emit("D_re", re, {h, h});
      emit("D_im", im, {h, h});
    }
    rec["arrays"] = std::move(arrays);
    layers.push_back(std::move(rec));
  }
  manifest["layers"] = std::move(layers);
  write_json(dir / kManifestName, manifest);
}

// ---- scores ---------------------------------------------------------------

json scores_to_json(const ScoreTable& table) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "scores";
  j["method"] = to_string(table.method);
  j["policy"] = to_string(table.scope);
  j["epsilon"] = table.epsilon;
  j["seed"] = table.seed;
  json layers = json::array();
  for (const auto& ls : table.layers) {
    const auto ranks = ls.ranks();
    json modes = json::array();
    for (int i = 0; i < ls.n; ++i) {
      json m;
      m["index"] = i;
      m["E"] = num(ls.energy.empty() ? std::numeric_limits<double>::quiet_NaN() : ls.energy[i]);
      m["raw"] = num(ls.raw[i]);
      m["prefix_score"] = ls.normalized.empty() ? json(nullptr) : num(ls.normalized[ranks[i]]);
      m["prefix_sum"] = num(ls.prefix_sums[ranks[i]]);
      m["rank"] = ranks[i];
      modes.push_back(std::move(m));
    }
    json lj;
    lj["name"] = ls.layer;
    lj["n"] = ls.n;
    lj["conjugate_pairs"] = ls.conjugate_pairs;
    lj["modes"] = std::move(modes);
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j;
}

ScoreTable scores_from_json(const json& j) {
  if (j.value("kind", std::string()) != "scores") {
    throw ValidationError("malformed score file", {"'kind' must be \"scores\""});
  }
  ScoreTable t;
  t.method = method_from_string(require_field<std::string>(j, "method", "scores"));
  t.scope = scope_from_string(require_field<std::string>(j, "policy", "scores"));
  t.epsilon = require_field<double>(j, "epsilon", "scores");
  t.seed = j.value("seed", std::uint64_t{0});
  for (const auto& lj : j.at("layers")) {
    LayerScores ls;
    ls.layer = require_field<std::string>(lj, "name", "scores layer");
    ls.n = require_field<int>(lj, "n", "scores layer");
    ls.conjugate_pairs = lj.value("conjugate_pairs", false);
    const auto& modes = lj.at("modes");
    if (static_cast<int>(modes.size()) != ls.n) {
      throw ValidationError("malformed score file", {"layer '" + ls.layer + "' lists " +
                                                     std::to_string(modes.size()) + " modes, n = " +
                                                     std::to_string(ls.n)});
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ls.raw.assign(ls.n, nan);
    ls.energy.assign(ls.n, nan);
    ls.order.assign(ls.n, -1);
    ls.prefix_sums.assign(ls.n, nan);
    const bool prefix = t.scope == Scope::prefix;
    if (prefix) ls.normalized.assign(ls.n, nan);
    std::vector<int> seen(ls.n, 0);
    for (const auto& m : modes) {
      const int i = require_field<int>(m, "index", "scores mode");
      const int r = require_field<int>(m, "rank", "scores mode");
      if (i < 0 || i >= ls.n || r < 0 || r >= ls.n || seen[i]++ || ls.order[r] != -1) {
        throw ValidationError("malformed score file",
                              {"layer '" + ls.layer + "': index/rank entries are not a permutation"});
      }
      ls.order[r] = i;
      ls.raw[i] = get_num(m.at("raw"), nan);
      ls.energy[i] = get_num(m.value("E", json(nullptr)), nan);
      ls.prefix_sums[r] = get_num(m.value("prefix_sum", json(nullptr)), nan);
      if (prefix) ls.normalized[r] = get_num(m.at("prefix_score"), nan);
    }
    t.layers.push_back(std::move(ls));
  }
  return t;
}

// ---- decisions ------------------------------------------------------------

json decision_to_json(const PruneDecision& d) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "decision";
  j["method"] = to_string(d.method);
  j["policy"] = to_string(d.policy);
  j["epsilon"] = d.epsilon;
  j["seed"] = d.seed;
  j["requested_ratio"] = d.requested_ratio ? num(*d.requested_ratio) : json(nullptr);
  j["threshold"] = d.threshold ? num(*d.threshold) : json(nullptr);
  j["tau"] = num(d.tau);
  j["achieved_ratio"] = d.achieved_ratio;
  j["layer_floor"] = d.layer_floor;
  j["kept_modes"] = d.kept_modes();
  j["total_modes"] = d.total_modes();
  json layers = json::array();
  for (const auto& ld : d.layers) {
    json lj;
    lj["name"] = ld.layer;
    lj["n"] = ld.n;
    lj["conjugate_pairs"] = ld.conjugate_pairs;
    lj["kept_states"] = static_cast<int>(ld.kept.size()) * ld.state_multiplicity();
    lj["kept"] = ld.kept;
    lj["pruned"] = ld.pruned;
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  return j;
}

PruneDecision decision_from_json(const json& j) {
  if (j.value("kind", std::string()) != "decision") {
    throw ValidationError("malformed decision file", {"'kind' must be \"decision\""});
  }
  PruneDecision d;
  d.method = method_from_string(require_field<std::string>(j, "method", "decision"));
  d.policy = policy_from_string(require_field<std::string>(j, "policy", "decision"));
  d.epsilon = j.value("epsilon", kDefaultEpsilon);
  d.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("requested_ratio") && !j.at("requested_ratio").is_null()) {
    d.requested_ratio = j.at("requested_ratio").get<double>();
  }
  if (j.contains("threshold") && !j.at("threshold").is_null()) d.threshold = j.at("threshold").get<double>();
  const double missing_tau = d.policy == Policy::uniform_ratio ? std::numeric_limits<double>::quiet_NaN()
                                                               : std::numeric_limits<double>::infinity();
  d.tau = get_num(j.value("tau", json(nullptr)), missing_tau);
  d.achieved_ratio = require_field<double>(j, "achieved_ratio", "decision");
  d.layer_floor = j.value("layer_floor", 0);
  std::vector<std::string> problems;
  for (const auto& lj : j.at("layers")) {
    LayerDecision ld;
    ld.layer = require_field<std::string>(lj, "name", "decision layer");
    ld.n = require_field<int>(lj, "n", "decision layer");
    ld.conjugate_pairs = lj.value("conjugate_pairs", false);
    ld.kept = require_field<std::vector<int>>(lj, "kept", "decision layer");
    ld.pruned = require_field<std::vector<int>>(lj, "pruned", "decision layer");
    std::vector<int> seen(std::max(ld.n, 0), 0);
    for (const auto* set : {&ld.kept, &ld.pruned}) {
      for (int i : *set) {
        if (i < 0 || i >= ld.n || ++seen[i] > 1) {
          problems.push_back("layer '" + ld.layer + "': index " + std::to_string(i) +
                             " is out of range or listed twice");
        }
      }
    }
    if (std::count(seen.begin(), seen.end(), 0) > 0) {
      problems.push_back("layer '" + ld.layer + "': kept and pruned do not cover every mode");
    }
    d.layers.push_back(std::move(ld));
  }
  if (!problems.empty()) throw ValidationError("malformed decision file", std::move(problems));
  return d;
}

// ---- reports --------------------------------------------------------------

json distortion_to_json(const std::vector<LayerDistortion>& rows) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "distortion";
  json layers = json::array();
  double modal = 0.0, exact = 0.0, hinf = 0.0;
  for (const auto& r : rows) {
    json lj;
    lj["name"] = r.layer;
    lj["modal_drop"] = num(r.modal_drop);
    lj["exact_h2"] = num(r.exact_h2);
    lj["impulse_rmse"] = num(r.impulse_rmse);
    lj["empirical_hinf"] = num(r.empirical_hinf);
    lj["mc_power_delta"] = r.mc_power_delta ? num(*r.mc_power_delta) : json(nullptr);
    lj["mc_std_error"] = r.mc_std_error ? num(*r.mc_std_error) : json(nullptr);
    layers.push_back(std::move(lj));
    modal += r.modal_drop;
    exact += r.exact_h2;
    hinf = std::max(hinf, r.empirical_hinf);
  }
  j["layers"] = std::move(layers);
  j["total"] = {{"modal_drop", num(modal)}, {"exact_h2", num(exact)}, {"max_empirical_hinf", num(hinf)}};
  return j;
}

json certificates_to_json(const std::vector<CertificateReport>& certs, const StackBound* stack_bound) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "certificate";
  json layers = json::array();
  for (const auto& c : certs) {
    json lj;
    lj["name"] = c.layer;
    lj["pruned_modes"] = c.pruned_modes;
    lj["pruned_members"] = c.pruned_members;
    lj["energy_tail"] = num(c.energy_tail);
    lj["rho"] = num(c.rho);
    lj["kappa"] = num(c.kappa);
    lj["bound_sum_roots"] = num(c.bound_sum_roots);
    lj["bound_root_sum"] = num(c.bound_root_sum);
    lj["bound"] = num(c.bound);
    lj["last_style_bound"] = num(c.last_style_bound);
    lj["empirical_hinf"] = num(c.empirical_hinf);
    lj["grid_points"] = c.grid_points;
    lj["holds"] = c.empirical_hinf <= c.bound * (1.0 + 1e-9);
    layers.push_back(std::move(lj));
  }
  j["layers"] = std::move(layers);
  if (stack_bound) {
    j["stack"] = {{"composition", "residual telescoping, conservative"},
                  {"bound_per_unit_input", num(stack_bound->bound)},
                  {"lipschitz", stack_bound->lipschitz},
                  {"full_gain", stack_bound->full_gain},
                  {"reduced_gain", stack_bound->reduced_gain}};
  }
  return j;
}

json sweep_to_json(const std::vector<SweepRow>& rows, Method method, Scope scope) {
  json j;
  j["format_version"] = kFormatVersion;
  j["kind"] = "sweep";
  j["method"] = to_string(method);
  j["policy"] = to_string(scope);
  json arr = json::array();
  for (const auto& r : rows) {
    json rj;
    rj["ratio"] = r.ratio;
    rj["achieved_ratio"] = r.achieved_ratio;
    rj["kept_modes"] = r.kept_modes;
    rj["total_modes"] = r.total_modes;
    rj["tau"] = num(r.tau);
    rj["modal_drop"] = num(r.modal_drop);
    rj["exact_h2"] = num(r.exact_h2);
    rj["empirical_hinf"] = num(r.empirical_hinf);
    rj["bound"] = num(r.bound);
    rj["last_style_bound"] = num(r.last_style_bound);
    json kf = json::array();
    for (const auto& [name, frac] : r.kept_fraction) kf.push_back({{"name", name}, {"kept_fraction", frac}});
    rj["layers"] = std::move(kf);
    arr.push_back(std::move(rj));
  }
  j["rows"] = std::move(arr);
  return j;
}

std::vector<SweepRow> sweep_from_json(const json& j) {
  if (j.value("kind", std::string()) != "sweep") {
    throw ValidationError("malformed sweep file", {"'kind' must be \"sweep\""});
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<SweepRow> rows;
  for (const auto& rj : j.at("rows")) {
    SweepRow r;
    r.ratio = require_field<double>(rj, "ratio", "sweep row");
    r.achieved_ratio = require_field<double>(rj, "achieved_ratio", "sweep row");
    r.kept_modes = require_field<int>(rj, "kept_modes", "sweep row");
    r.total_modes = require_field<int>(rj, "total_modes", "sweep row");
    r.tau = get_num(rj.value("tau", json(nullptr)), nan);
    r.modal_drop = get_num(rj.at("modal_drop"), nan);
    r.exact_h2 = get_num(rj.at("exact_h2"), nan);
    r.empirical_hinf = get_num(rj.at("empirical_hinf"), nan);
    r.bound = get_num(rj.at("bound"), nan);
    r.last_style_bound = get_num(rj.value("last_style_bound", json(nullptr)), nan);
    for (const auto& lj : rj.at("layers")) {
      r.kept_fraction.emplace_back(lj.at("name").get<std::string>(), lj.at("kept_fraction").get<double>());
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string render_sweep_table(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "ratio" << std::setw(10) << "achieved" << std::setw(10) << "kept"
     << std::setw(14) << "modal_drop" << std::setw(14) << "exact_h2" << std::setw(14) << "emp_hinf"
     << std::setw(14) << "bound" << "\n";
  os << std::string(84, '-') << "\n";
  for (const auto& r : rows) {
    os << std::left << std::fixed << std::setprecision(3) << std::setw(8) << r.ratio << std::setw(10)
       << r.achieved_ratio << std::setw(10)
       << (std::to_string(r.kept_modes) + "/" + std::to_string(r.total_modes)) << std::scientific
       << std::setprecision(4) << std::setw(14) << r.modal_drop << std::setw(14) << r.exact_h2
       << std::setw(14) << r.empirical_hinf << std::setw(14) << r.bound << "\n";
  }
  if (!rows.empty()) {
    os << "\nkept states per layer (%)\n";
    os << std::left << std::setw(16) << "layer";
    for (const auto& r : rows) os << std::right << std::fixed << std::setprecision(2) << std::setw(8) << r.ratio;
    os << "\n";
    for (std::size_t l = 0; l < rows.front().kept_fraction.size(); ++l) {
      os << std::left << std::setw(16) << rows.front().kept_fraction[l].first;
      for (const auto& r : rows) {
        os << std::right << std::fixed << std::setprecision(1) << std::setw(8)
           << 100.0 * r.kept_fraction[l].second;
      }
      os << "\n";
    }
  }
  return os.str();
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "ratio,achieved_ratio,kept_modes,total_modes,modal_drop,exact_h2,empirical_hinf,bound,"
        "last_style_bound,layer,kept_fraction\n";
  for (const auto& r : rows) {
    for (const auto& [name, frac] : r.kept_fraction) {
      os << r.ratio << "," << r.achieved_ratio << "," << r.kept_modes << "," << r.total_modes << ","
         << r.modal_drop << "," << r.exact_h2 << "," << r.empirical_hinf << "," << r.bound << ","
         << r.last_style_bound << "," << name << "," << frac << "\n";
    }
  }
  return os.str();
}

}  // namespace ssmprune
