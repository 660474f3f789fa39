#pragma once

#include "alviz/al_engine.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace alviz {

// Versioned JSON encoding of a RunArtifact. Top-level keys, in order:
// schema_version, config, dataset_hash, strategies, predictions,
// queried_indices, queried_labels, mse, test_labels, pc_coords,
// pc_explained_variance. Floats are written with 17 significant digits, so
// the encoding is byte-stable and round-trips exactly.
std::string to_json(const RunArtifact& artifact);

// Rejects unknown schema versions, missing or extra top-level keys, and
// artifacts that fail validate_artifact.
RunArtifact artifact_from_json(std::string_view text);

void write_artifact(const RunArtifact& artifact, const std::filesystem::path& path);
RunArtifact read_artifact(const std::filesystem::path& path);

// Shortest-to-read float text at 17 significant digits (locale-free).
void append_float(std::string& out, double value);

}  // namespace alviz
