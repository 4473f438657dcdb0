#include "iwagg/bundle_io.hpp"

#include "iwagg/error.hpp"
#include "iwagg/text_io.hpp"

#include <cmath>

namespace iwagg {

namespace fs = std::filesystem;

namespace {

constexpr const char* kFormatTag = "iwagg-bundle";

struct Manifest {
  std::vector<std::string> models;
  Index d1 = 0;
  Index d2 = 0;
  bool source_features = false;
  bool target_features = false;
  bool target_labels = false;
  std::string provenance;
};

Manifest read_manifest(const fs::path& path) {
  const Json j = read_json_file(path);
  Manifest m;
  try {
    for (const auto& name : j.at("models")) m.models.push_back(name.get<std::string>());
    m.d1 = j.value("d1", Index{0});
    m.d2 = j.at("d2").get<Index>();
    m.source_features = j.value("source_features", false);
    m.target_features = j.value("target_features", false);
    m.target_labels = j.value("target_labels", false);
    m.provenance = j.value("provenance", std::string{});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::MalformedFile, path.string() + ": " + e.what());
  }
  if (m.d2 < 1) fail(ErrorKind::MalformedFile, path.string() + ": d2 must be >= 1");
  if ((m.source_features || m.target_features) && m.d1 < 1)
    fail(ErrorKind::MalformedFile, path.string() + ": features declared but d1 < 1");
  for (const auto& name : m.models)
    if (!is_valid_model_name(name))
      fail(ErrorKind::MalformedFile, path.string() + ": invalid model name '" + name + "'");
  return m;
}

std::vector<std::string> numbered(const std::string& prefix, Index count) {
  std::vector<std::string> out;
  for (Index i = 1; i <= count; ++i) out.push_back(prefix + "_" + std::to_string(i));
  return out;
}

/// Column blocks of one CSV file, in header order after the id column.
struct Block {
  std::string prefix;
  Index width;
};

struct ParsedTable {
  std::vector<std::string> ids;
  std::vector<Matrix> blocks;
};

ParsedTable parse_table(const fs::path& path, const std::vector<Block>& blocks,
                        std::optional<Index> expected_rows) {
  const CsvTable csv = read_csv(path);
  std::vector<std::string> expected = {"id"};
  for (const auto& b : blocks) {
    const auto names = numbered(b.prefix, b.width);
    expected.insert(expected.end(), names.begin(), names.end());
  }
  if (csv.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    fail(ErrorKind::DimensionMismatch,
         path.string() + ": header does not match manifest (expected " + want + ")");
  }
  const auto rows = static_cast<Index>(csv.rows.size());
  if (expected_rows && rows != *expected_rows)
    fail(ErrorKind::DimensionMismatch, path.string() + ": " + std::to_string(rows) +
                                           " rows, expected " + std::to_string(*expected_rows));
  ParsedTable out;
  out.ids.reserve(csv.rows.size());
  for (const auto& b : blocks) out.blocks.emplace_back(rows, b.width);
  for (Index r = 0; r < rows; ++r) {
    const auto& cells = csv.rows[static_cast<std::size_t>(r)];
    out.ids.push_back(cells[0]);
    std::size_t col = 1;
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      for (Index c = 0; c < blocks[b].width; ++c, ++col) {
        const double v = parse_double(cells[col], path, static_cast<std::size_t>(r));
        if (!std::isfinite(v))
          fail(ErrorKind::NonFiniteValue, path.string() + ": row " + std::to_string(r) +
                                              " (id " + cells[0] + "), column " +
                                              csv.header[col] + " is not finite");
        out.blocks[b](r, c) = v;
      }
    }
  }
  return out;
}

void check_ids(const fs::path& path, const std::vector<std::string>& got,
               const std::vector<std::string>& want) {
  for (std::size_t i = 0; i < got.size(); ++i)
    if (got[i] != want[i])
      fail(ErrorKind::MalformedFile, path.string() + ": row " + std::to_string(i) + " has id '" +
                                         got[i] + "', expected '" + want[i] + "'");
}

void append_row(std::string& out, Index id, std::initializer_list<const Matrix*> blocks, Index r) {
  out += std::to_string(id);
  for (const Matrix* m : blocks) {
    if (!m) continue;
    for (Index c = 0; c < m->cols(); ++c) {
      out += ',';
      out += format_double((*m)(r, c));
    }
  }
  out += '\n';
}

std::string header_line(std::initializer_list<std::pair<const char*, Index>> blocks) {
  std::string out = "id";
  for (const auto& [prefix, width] : blocks)
    for (const auto& name : numbered(prefix, width)) out += "," + name;
  return out + "\n";
}

fs::path model_file(const fs::path& dir, const std::string& name, const char* side) {
  return dir / ("model_" + name + "_" + side + ".csv");
}

}  // namespace

PredictionBundle load_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) fail(ErrorKind::MissingFile, dir.string() + ": not a directory");
  const Manifest mf = read_manifest(dir / "manifest.json");
  if (mf.models.empty())
    fail(ErrorKind::MalformedFile, (dir / "manifest.json").string() + ": no models listed");

  std::vector<Block> source_blocks;
  if (mf.source_features) source_blocks.push_back({"x", mf.d1});
  source_blocks.push_back({"y", mf.d2});
  const auto source_path = dir / "source.csv";
  ParsedTable src = parse_table(source_path, source_blocks, std::nullopt);
  if (src.ids.empty()) fail(ErrorKind::EmptyInput, source_path.string() + ": no rows");

  std::vector<Block> target_blocks;
  if (mf.target_features) target_blocks.push_back({"x", mf.d1});
  if (mf.target_labels) target_blocks.push_back({"y", mf.d2});
  const auto target_path = dir / "target.csv";
  ParsedTable tgt = parse_table(target_path, target_blocks, std::nullopt);
  if (tgt.ids.empty()) fail(ErrorKind::EmptyInput, target_path.string() + ": no rows");

  const auto n_s = static_cast<Index>(src.ids.size());
  const auto n_t = static_cast<Index>(tgt.ids.size());
  std::vector<Matrix> source_preds;
  std::vector<Matrix> target_preds;
  for (const auto& name : mf.models) {
    for (const char* side : {"source", "target"}) {
      const bool is_source = side[0] == 's';
      const auto path = model_file(dir, name, side);
      ParsedTable t = parse_table(path, {{"f", mf.d2}}, is_source ? n_s : n_t);
      check_ids(path, t.ids, is_source ? src.ids : tgt.ids);
      (is_source ? source_preds : target_preds).push_back(std::move(t.blocks[0]));
    }
  }

  std::optional<Matrix> source_x;
  if (mf.source_features) source_x = std::move(src.blocks[0]);
  Matrix source_y = std::move(src.blocks.back());
  std::optional<Matrix> target_x;
  std::optional<Matrix> target_y;
  std::size_t b = 0;
  if (mf.target_features) target_x = std::move(tgt.blocks[b++]);
  if (mf.target_labels) target_y = std::move(tgt.blocks[b++]);

  return PredictionBundle(mf.models, PredictionTensor(std::move(source_preds)),
                          PredictionTensor(std::move(target_preds)),
                          SourceDataset(std::move(source_x), std::move(source_y)),
                          TargetDataset(std::move(target_x), std::move(target_y), n_t),
                          mf.provenance);
}

void write_bundle(const PredictionBundle& bundle, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    fail(ErrorKind::IoFailure, dir.string() + ": cannot create directory");

  const auto& src = bundle.source();
  const auto& tgt = bundle.target();
  const Index d1 = bundle.feature_dim();
  const Index d2 = bundle.output_dim();

  Json manifest;
  manifest["format"] = kFormatTag;
  manifest["version"] = 1;
  manifest["models"] = bundle.model_names();
  manifest["d1"] = d1;
  manifest["d2"] = d2;
  manifest["source_features"] = src.features().has_value();
  manifest["target_features"] = tgt.features().has_value();
  manifest["target_labels"] = tgt.has_oracle_labels();
  manifest["provenance"] = bundle.provenance();
  write_text_file(dir / "manifest.json", dump_json(manifest));

  {
    const Matrix* x = src.features() ? &*src.features() : nullptr;
    std::string out = header_line({{"x", x ? d1 : 0}, {"y", d2}});
    for (Index r = 0; r < src.size(); ++r) append_row(out, r, {x, &src.labels()}, r);
    write_text_file(dir / "source.csv", out);
  }
  {
    const Matrix* x = tgt.features() ? &*tgt.features() : nullptr;
    const Matrix* y = tgt.oracle_labels() ? &*tgt.oracle_labels() : nullptr;
    std::string out = header_line({{"x", x ? d1 : 0}, {"y", y ? d2 : 0}});
    for (Index r = 0; r < tgt.size(); ++r) append_row(out, r, {x, y}, r);
    write_text_file(dir / "target.csv", out);
  }
  for (Index k = 0; k < bundle.model_count(); ++k) {
    const auto& name = bundle.model_names()[static_cast<std::size_t>(k)];
    write_matrix_csv(bundle.source_preds()[k], "f", model_file(dir, name, "source"));
    write_matrix_csv(bundle.target_preds()[k], "f", model_file(dir, name, "target"));
  }
}

void write_matrix_csv(const Matrix& m, const std::string& prefix, const fs::path& path) {
  std::string out = header_line({{prefix.c_str(), m.cols()}});
  for (Index r = 0; r < m.rows(); ++r) append_row(out, r, {&m}, r);
  write_text_file(path, out);
}

void write_vector_csv(const Vector& v, const std::string& column, const fs::path& path) {
  std::string out = "id," + column + "\n";
  for (Index r = 0; r < v.size(); ++r) out += std::to_string(r) + "," + format_double(v(r)) + "\n";
  write_text_file(path, out);
}

Vector read_vector_csv(const fs::path& path) {
  const CsvTable csv = read_csv(path);
  if (csv.header.size() != 2 || csv.header[0] != "id")
    fail(ErrorKind::MalformedFile, path.string() + ": expected header 'id,<value>'");
  Vector v(static_cast<Index>(csv.rows.size()));
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    v(static_cast<Index>(r)) = parse_double(csv.rows[r][1], path, r);
    if (!std::isfinite(v(static_cast<Index>(r))))
      fail(ErrorKind::NonFiniteValue, path.string() + ": row " + std::to_string(r) + " is not finite");
  }
  return v;
}

}  // namespace iwagg
