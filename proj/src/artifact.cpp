#include "alviz/artifact.hpp"

#include "alviz/errors.hpp"

#include <json.hpp>

#include <array>
#include <charconv>
#include <fstream>
#include <iterator>

namespace alviz {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, 11> kTopLevelKeys{
    "schema_version", "config", "dataset_hash", "strategies", "predictions", "queried_indices",
    "queried_labels", "mse", "test_labels", "pc_coords", "pc_explained_variance"};

void append_int(std::string& out, long long value) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, res.ptr);
}

void append_uint(std::string& out, std::uint64_t value) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, res.ptr);
}

void append_string(std::string& out, std::string_view s) { out += json(std::string(s)).dump(); }

template <typename Derived>
void append_row(std::string& out, const Eigen::DenseBase<Derived>& row) {
  out += '[';
  for (Index j = 0; j < row.size(); ++j) {
    if (j) out += ',';
    if constexpr (std::is_integral_v<typename Derived::Scalar>) {
      append_int(out, static_cast<long long>(row(j)));
    } else {
      append_float(out, row(j));
    }
  }
  out += ']';
}

template <typename Derived>
void append_matrix(std::string& out, const Eigen::DenseBase<Derived>& m) {
  out += '[';
  for (Index i = 0; i < m.rows(); ++i) {
    if (i) out += ',';
    append_row(out, m.row(i));
  }
  out += ']';
}

template <typename M>
void append_stack(std::string& out, const std::vector<M>& per_strategy) {
  out += '[';
  for (std::size_t s = 0; s < per_strategy.size(); ++s) {
    if (s) out += ',';
    append_matrix(out, per_strategy[s]);
  }
  out += ']';
}

void append_config(std::string& out, const ExperimentConfig& c) {
  out += "{\"strategies\":[";
  for (std::size_t s = 0; s < c.strategies.size(); ++s) {
    if (s) out += ',';
    append_string(out, to_string(c.strategies[s]));
  }
  out += "],\"batch_size\":";
  append_int(out, c.batch_size);
  out += ",\"num_batches\":";
  append_int(out, c.num_batches);
  out += ",\"seed\":";
  append_uint(out, c.seed);
  out += ",\"lifetime\":";
  append_float(out, c.lifetime);
  out += ",\"max_depth\":";
  append_int(out, c.max_depth);
  out += ",\"test_fraction\":";
  append_float(out, c.test_fraction);
  out += ",\"standardize_embedding\":";
  out += c.standardize_embedding ? "true" : "false";
  out += ",\"data_source\":";
  append_string(out, c.data_source);
  out += ",\"target\":";
  append_string(out, c.target);
  // Derived, informational.
  out += ",\"shared_partition\":true,\"tree_feature_scaling\":\"unit_box\",\"partition_seed\":";
  append_uint(out, partition_seed(c.seed));
  out += '}';
}

const json& need(const json& obj, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw DataError(std::string("run artifact: missing key '") + key + "'");
  return *it;
}

std::vector<Strategy> strategies_of(const json& arr) {
  std::vector<Strategy> out;
  for (const auto& s : arr) out.push_back(parse_strategy(s.get<std::string>()));
  return out;
}

template <typename M>
M matrix_of(const json& rows, Index expected_cols = -1) {
  using Scalar = typename M::Scalar;
  const auto r = static_cast<Index>(rows.size());
  Index c = r > 0 ? static_cast<Index>(rows.front().size()) : std::max<Index>(expected_cols, 0);
  M m(r, c);
  for (Index i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Index>(row.size()) != c) throw DataError("run artifact: ragged array");
    for (Index j = 0; j < c; ++j) m(i, j) = row[static_cast<std::size_t>(j)].get<Scalar>();
  }
  return m;
}

template <typename M>
std::vector<M> stack_of(const json& arr, Index expected_cols = -1) {
  std::vector<M> out;
  for (const auto& m : arr) out.push_back(matrix_of<M>(m, expected_cols));
  return out;
}

}  // namespace

void append_float(std::string& out, double value) {
  if (value == 0.0) value = 0.0;  // "-0" would read back as integer 0
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

std::string to_json(const RunArtifact& a) {
  std::string out;
  out.reserve(64 + static_cast<std::size_t>(a.n_test()) * 24 * static_cast<std::size_t>(a.mse.size()));
  out += "{\"schema_version\":";
  append_int(out, a.schema_version);
  out += ",\"config\":";
  append_config(out, a.config);
  out += ",\"dataset_hash\":";
  append_uint(out, a.dataset_hash);
  out += ",\"strategies\":[";
  for (std::size_t s = 0; s < a.strategies.size(); ++s) {
    if (s) out += ',';
    append_string(out, to_string(a.strategies[s]));
  }
  out += "],\"predictions\":";
  append_stack(out, a.predictions);
  out += ",\"queried_indices\":";
  append_stack(out, a.queried_indices);
  out += ",\"queried_labels\":";
  append_stack(out, a.queried_labels);
  out += ",\"mse\":";
  append_matrix(out, a.mse);
  out += ",\"test_labels\":";
  append_row(out, a.test_labels);
  out += ",\"pc_coords\":";
  append_matrix(out, a.pc_coords);
  out += ",\"pc_explained_variance\":[";
  append_float(out, a.pc_explained_variance[0]);
  out += ',';
  append_float(out, a.pc_explained_variance[1]);
  out += "]}\n";
  return out;
}

RunArtifact artifact_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("run artifact: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("run artifact: top level is not an object");
  const auto version = need(doc, "schema_version");
  if (!version.is_number_integer() || version.get<int>() != RunArtifact::kSchemaVersion) {
    throw DataError("run artifact: unsupported schema_version " + version.dump());
  }
  for (const auto& item : doc.items()) {
    if (std::find(kTopLevelKeys.begin(), kTopLevelKeys.end(), item.key()) == kTopLevelKeys.end()) {
      throw DataError("run artifact: unexpected key '" + item.key() + "'");
    }
  }

  RunArtifact a;
  try {
    const auto& c = need(doc, "config");
    a.config.strategies = strategies_of(need(c, "strategies"));
    a.config.batch_size = need(c, "batch_size").get<Index>();
    a.config.num_batches = need(c, "num_batches").get<Index>();
    a.config.seed = need(c, "seed").get<std::uint64_t>();
    a.config.lifetime = need(c, "lifetime").get<double>();
    a.config.max_depth = need(c, "max_depth").get<int>();
    a.config.test_fraction = need(c, "test_fraction").get<double>();
    a.config.standardize_embedding = need(c, "standardize_embedding").get<bool>();
    a.config.data_source = need(c, "data_source").get<std::string>();
    a.config.target = need(c, "target").get<std::string>();

    a.dataset_hash = need(doc, "dataset_hash").get<std::uint64_t>();
    a.strategies = strategies_of(need(doc, "strategies"));
    a.predictions = stack_of<RowMatrix>(need(doc, "predictions"));
    a.queried_indices = stack_of<IndexMatrix>(need(doc, "queried_indices"), a.config.batch_size);
    a.queried_labels = stack_of<RowMatrix>(need(doc, "queried_labels"), a.config.batch_size);
    a.mse = matrix_of<RowMatrix>(need(doc, "mse"));
    const auto& labels = need(doc, "test_labels");
    a.test_labels.resize(static_cast<Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) a.test_labels(static_cast<Index>(i)) = labels[i].get<double>();
    const auto& coords = need(doc, "pc_coords");
    a.pc_coords.resize(static_cast<Index>(coords.size()), 2);
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (coords[i].size() != 2) throw DataError("run artifact: pc_coords rows must have 2 entries");
      a.pc_coords(static_cast<Index>(i), 0) = coords[i][0].get<double>();
      a.pc_coords(static_cast<Index>(i), 1) = coords[i][1].get<double>();
    }
    const auto& ratio = need(doc, "pc_explained_variance");
    if (ratio.size() != 2) throw DataError("run artifact: pc_explained_variance must have 2 entries");
    a.pc_explained_variance = {ratio[0].get<double>(), ratio[1].get<double>()};
  } catch (const json::exception& e) {
    throw DataError(std::string("run artifact: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("run artifact: ") + e.what());
  }
  validate_artifact(a);
  return a;
}

void write_artifact(const RunArtifact& artifact, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto text = to_json(artifact);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

RunArtifact read_artifact(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return artifact_from_json(text);
}

}  // namespace alviz
