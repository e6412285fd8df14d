#pragma once

#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "ssmprune/certificates.hpp"

namespace ssmprune {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr const char* kFormatVersion = "1";
inline constexpr const char* kManifestName = "manifest.json";

/// Unreadable or unwritable files, malformed containers.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadOptions {
  bool discretize = true;  // ZOH-discretize continuous layers after validation
};

/// Reads a model directory (or a manifest path). Parameter arrays are raw
/// little-endian f64, row-major, or inline JSON values. Continuous layers are
/// discretized unless opts.discretize is false; a note is appended to
/// `warnings` for each one.
ModelStack load_model(const fs::path& path, const LoadOptions& opts = {},
                      std::vector<std::string>* warnings = nullptr);

/// Writes manifest.json plus one .bin per array (or inline values). Every file
/// is written to a temporary name and renamed into place.
void save_model(const ModelStack& stack, const fs::path& dir, bool inline_arrays = false);

json scores_to_json(const ScoreTable& table);
ScoreTable scores_from_json(const json& j);

json decision_to_json(const PruneDecision& d);
PruneDecision decision_from_json(const json& j);

json distortion_to_json(const std::vector<LayerDistortion>& rows);
json certificates_to_json(const std::vector<CertificateReport>& certs, const StackBound* stack_bound);

json sweep_to_json(const std::vector<SweepRow>& rows, Method method, Scope scope);
std::vector<SweepRow> sweep_from_json(const json& j);

/// Human-readable trade-off table followed by per-layer kept percentages.
std::string render_sweep_table(const std::vector<SweepRow>& rows);
/// Same content as render_sweep_table, one CSV row per (ratio, layer).
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);
void write_text_atomic(const fs::path& path, const std::string& text);

}  // namespace ssmprune
