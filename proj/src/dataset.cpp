#include "alviz/dataset.hpp"

#include "alviz/errors.hpp"
#include "alviz/rng.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

namespace alviz {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line, char delimiter) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

void append_double(std::string& out, double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

PiecewiseConstantField draw_field(Rng& rng, Index d) {
  PiecewiseConstantField field;
  const Index grid_dims = std::min<Index>(d, 3);
  std::size_t cells = 1;
  for (Index g = 0; g < grid_dims; ++g) {
    field.cuts.push_back({0.2 + 0.2 * rng.uniform01(), 0.6 + 0.2 * rng.uniform01()});
    cells *= 3;
  }
  field.levels.resize(cells);
  for (auto& v : field.levels) v = std::round(-10.0 + 20.0 * rng.uniform01());
  return field;
}

}  // namespace

std::size_t PiecewiseConstantField::cell_of(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  std::size_t cell = 0;
  for (std::size_t g = 0; g < cuts.size(); ++g) {
    const double v = x(static_cast<Index>(g));
    const int bin = v <= cuts[g][0] ? 0 : (v <= cuts[g][1] ? 1 : 2);
    cell = cell * 3 + static_cast<std::size_t>(bin);
  }
  return cell;
}

PiecewiseConstantField piecewise_constant_field(Index d, std::uint64_t seed) {
  Rng rng(seed);
  return draw_field(rng, d);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

Dataset Dataset::subset(std::span<const Index> row_ids) const {
  Dataset out;
  out.features.resize(static_cast<Index>(row_ids.size()), dims());
  out.labels.resize(static_cast<Index>(row_ids.size()));
  for (std::size_t i = 0; i < row_ids.size(); ++i) {
    out.features.row(static_cast<Index>(i)) = features.row(row_ids[i]);
    out.labels(static_cast<Index>(i)) = labels(row_ids[i]);
  }
  out.feature_names = feature_names;
  out.target_name = target_name;
  out.source_id = source_id;
  out.content_hash = content_hash;
  return out;
}

Dataset parse_csv(std::string_view text, std::string_view target_column, char delimiter,
                  std::string source_id) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto pos = text.find('\n', start);
      if (pos == std::string_view::npos) pos = text.size();
      const auto line = trim(text.substr(start, pos - start));
      if (!line.empty()) lines.push_back(line);
      start = pos + 1;
    }
  }
  if (lines.empty()) throw DataError(source_id + ": empty file");

  const auto header = split_fields(lines.front(), delimiter);
  Index target_idx = -1;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = unquote(header[c]);
    if (name == target_column && target_idx < 0) {
      target_idx = static_cast<Index>(c);
    } else {
      names.emplace_back(name);
    }
  }
  if (target_idx < 0) {
    throw DataError(source_id + ": target column '" + std::string(target_column) +
                    "' not found in header");
  }
  if (names.empty()) throw DataError(source_id + ": no feature columns");
  const auto n = static_cast<Index>(lines.size() - 1);
  if (n == 0) throw DataError(source_id + ": no data rows");
  const auto d = static_cast<Index>(names.size());

  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);
  for (Index r = 0; r < n; ++r) {
    const auto fields = split_fields(lines[static_cast<std::size_t>(r + 1)], delimiter);
    if (fields.size() != header.size()) {
      throw DataError(source_id + ": data row " + std::to_string(r + 1) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(header.size()));
    }
    Index feature_col = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto cell = unquote(fields[c]);
      double value = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      const bool parsed = res.ec == std::errc() && res.ptr == cell.data() + cell.size() && !cell.empty();
      auto where = [&] {
        return source_id + ": data row " + std::to_string(r + 1) + ", column '" +
               std::string(unquote(header[c])) + "'";
      };
      if (!parsed) throw DataError(where() + ": non-numeric cell '" + std::string(cell) + "'");
      if (!std::isfinite(value)) throw DataError(where() + ": non-finite value '" + std::string(cell) + "'");
      if (static_cast<Index>(c) == target_idx) {
        ds.labels(r) = value;
      } else {
        ds.features(r, feature_col++) = value;
      }
    }
  }
  ds.feature_names = std::move(names);
  ds.target_name = std::string(target_column);
  ds.source_id = std::move(source_id);
  ds.content_hash = fnv1a64(text);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path, std::string_view target_column, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return parse_csv(bytes, target_column, delimiter, path.string());
}

std::string to_csv(const Dataset& dataset, char delimiter) {
  std::string out = dataset.target_name;
  for (const auto& name : dataset.feature_names) {
    out += delimiter;
    out += name;
  }
  out += '\n';
  for (Index r = 0; r < dataset.rows(); ++r) {
    append_double(out, dataset.labels(r));
    for (Index c = 0; c < dataset.dims(); ++c) {
      out += delimiter;
      append_double(out, dataset.features(r, c));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const Dataset& dataset, const std::filesystem::path& path, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  const auto text = to_csv(dataset, delimiter);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Split split(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw ConfigError("test fraction must lie in (0, 1)");
  }
  const Index n = dataset.rows();
  const auto n_test = static_cast<Index>(std::llround(static_cast<double>(n) * spec.test_fraction));
  if (n_test < 1 || n_test >= n) {
    throw ConfigError("test fraction " + std::to_string(spec.test_fraction) + " on " +
                      std::to_string(n) + " rows leaves an empty side");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(spec.seed);
  rng.shuffle(std::span(order));

  Split out;
  out.test_rows.assign(order.begin(), order.begin() + n_test);
  out.pool_rows.assign(order.begin() + n_test, order.end());
  out.test = dataset.subset(out.test_rows);
  out.pool = dataset.subset(out.pool_rows);
  return out;
}

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "clusters") return SyntheticKind::clusters;
  if (name == "piecewise_constant") return SyntheticKind::piecewise_constant;
  if (name == "plane") return SyntheticKind::plane;
  throw ConfigError("unknown synthetic kind '" + std::string(name) + "'");
}

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::clusters: return "clusters";
    case SyntheticKind::piecewise_constant: return "piecewise_constant";
    case SyntheticKind::plane: return "plane";
  }
  return "?";
}

Dataset make_synthetic(SyntheticKind kind, Index n, Index d, double noise_sd, std::uint64_t seed) {
  if (d < 1 || n < d) throw ConfigError("synthetic data needs n >= d >= 1");
  if (!(noise_sd >= 0.0)) throw ConfigError("noise_sd must be >= 0");
  if (kind == SyntheticKind::plane && d < 2) throw ConfigError("plane data needs d >= 2");

  Rng rng(seed);
  Dataset ds;
  ds.features.resize(n, d);
  ds.labels.resize(n);

  switch (kind) {
    case SyntheticKind::clusters: {
      constexpr Index kClusters = 4;
      RowMatrix centers(kClusters, d);
      for (Index k = 0; k < kClusters; ++k)
        for (Index c = 0; c < d; ++c) centers(k, c) = -6.0 + 12.0 * rng.uniform01();
      for (Index i = 0; i < n; ++i) {
        const Index k = i % kClusters;
        for (Index c = 0; c < d; ++c) ds.features(i, c) = centers(k, c) + 0.5 * rng.normal();
        ds.labels(i) = 5.0 * static_cast<double>(k) + noise_sd * rng.normal();
      }
      break;
    }
    case SyntheticKind::piecewise_constant: {
      const auto field = draw_field(rng, d);
      for (Index i = 0; i < n; ++i) {
        for (Index c = 0; c < d; ++c) ds.features(i, c) = rng.uniform01();
        ds.labels(i) = field(ds.features.row(i)) + noise_sd * rng.normal();
      }
      break;
    }
    case SyntheticKind::plane: {
      Eigen::VectorXd origin(d), u(d), v(d);
      for (Index c = 0; c < d; ++c) origin(c) = rng.normal();
      for (Index c = 0; c < d; ++c) u(c) = rng.normal();
      for (Index c = 0; c < d; ++c) v(c) = rng.normal();
      u.normalize();
      v -= v.dot(u) * u;
      v.normalize();
      for (Index i = 0; i < n; ++i) {
        const double a = 3.0 * rng.normal();
        const double b = 1.5 * rng.normal();
        for (Index c = 0; c < d; ++c) {
          ds.features(i, c) = origin(c) + a * u(c) + b * v(c) + noise_sd * rng.normal();
        }
        ds.labels(i) = std::sin(a) + 0.5 * b;
      }
      break;
    }
  }
  for (Index c = 0; c < d; ++c) ds.feature_names.push_back("x" + std::to_string(c));
  ds.target_name = "y";
  char noise[32];
  const auto noise_end = std::to_chars(noise, noise + sizeof noise, noise_sd).ptr;
  ds.source_id = "synthetic:" + std::string(to_string(kind)) + ":n=" + std::to_string(n) + ":d=" +
                 std::to_string(d) + ":noise=" + std::string(noise, noise_end) + ":seed=" + std::to_string(seed);
  ds.content_hash = fnv1a64(to_csv(ds));
  return ds;
}

Scaler::Scaler(Eigen::VectorXd center, Eigen::VectorXd scale)
    : center_(std::move(center)), scale_(std::move(scale)) {
  if (center_.size() != scale_.size()) throw ConfigError("scaler center/scale size mismatch");
  scale_ = scale_.cwiseMax(kScaleFloor);
}

Scaler Scaler::standard(const RowMatrix& features) {
  const Eigen::VectorXd mean = features.colwise().mean().transpose();
  const RowMatrix centered = features.rowwise() - mean.transpose();
  const Eigen::VectorXd sd =
      (centered.colwise().squaredNorm() / static_cast<double>(features.rows())).cwiseSqrt().transpose();
  return Scaler(mean, sd);
}

Scaler Scaler::unit_box(const RowMatrix& features) {
  const Eigen::VectorXd lo = features.colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = features.colwise().maxCoeff().transpose();
  return Scaler(lo, hi - lo);
}

RowMatrix Scaler::transform(const RowMatrix& features) const {
  if (features.cols() != center_.size()) throw ConfigError("scaler dimension mismatch");
  return ((features.rowwise() - center_.transpose()).array().rowwise() / scale_.transpose().array())
      .matrix();
}

RowMatrix Scaler::inverse_transform(const RowMatrix& scaled) const {
  if (scaled.cols() != center_.size()) throw ConfigError("scaler dimension mismatch");
  return ((scaled.array().rowwise() * scale_.transpose().array()).matrix().rowwise() +
          center_.transpose());
}

}  // namespace alviz
