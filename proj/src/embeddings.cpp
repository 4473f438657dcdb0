#include "iwagg/embeddings.hpp"

#include "iwagg/error.hpp"

namespace iwagg {

namespace {

Matrix parse_vectors(const Json& rows, const std::string& where) {
  if (!rows.is_array()) fail(ErrorKind::MalformedFile, where + ": expected an array of vectors");
  if (rows.empty()) fail(ErrorKind::MalformedFile, where + ": empty vector set");
  const auto h = static_cast<Index>(rows.size());
  Index width = -1;
  Matrix out;
  for (Index i = 0; i < h; ++i) {
    const Json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array())
      fail(ErrorKind::MalformedFile, where + "[" + std::to_string(i) + "]: expected an array");
    const auto w = static_cast<Index>(row.size());
    if (width < 0) {
      width = w;
      out.resize(h, width);
    } else if (w != width) {
      fail(ErrorKind::DimensionMismatch, where + "[" + std::to_string(i) + "] has width " +
                                             std::to_string(w) + ", expected " +
                                             std::to_string(width));
    }
    for (Index j = 0; j < w; ++j) {
      const Json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number())
        fail(ErrorKind::MalformedFile,
             where + "[" + std::to_string(i) + "][" + std::to_string(j) + "] is not a number");
      out(i, j) = v.get<double>();
    }
  }
  if (width < 1) fail(ErrorKind::MalformedFile, where + ": vectors have zero width");
  return out;
}

}  // namespace

LayerEmbeddingSet parse_embeddings(const Json& doc, const std::string& origin) {
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array())
    fail(ErrorKind::MalformedFile, origin + ": missing 'layers' array");
  std::vector<LayerEmbedding> layers;
  for (std::size_t i = 0; i < doc["layers"].size(); ++i) {
    const Json& l = doc["layers"][i];
    const std::string where = origin + ": layers[" + std::to_string(i) + "]";
    if (!l.is_object() || !l.contains("l") || !l["l"].is_number_integer() || !l.contains("p") ||
        !l.contains("q"))
      fail(ErrorKind::MalformedFile, where + ": expected {\"l\": int, \"p\": [...], \"q\": [...]}");
    LayerEmbedding layer;
    layer.layer = l["l"].get<int>();
    layer.source_vecs = parse_vectors(l["p"], where + ".p");
    layer.target_vecs = parse_vectors(l["q"], where + ".q");
    if (layer.source_vecs.cols() != layer.target_vecs.cols())
      fail(ErrorKind::DimensionMismatch, where + ": p width " +
                                             std::to_string(layer.source_vecs.cols()) +
                                             " != q width " +
                                             std::to_string(layer.target_vecs.cols()));
    layers.push_back(std::move(layer));
  }
  if (layers.empty()) fail(ErrorKind::MalformedFile, origin + ": no layers");

  std::optional<std::vector<LayerEmbeddingSet::Pair>> pairing;
  if (doc.contains("pairing") && !doc["pairing"].is_null()) {
    const Json& pj = doc["pairing"];
    if (!pj.is_array()) fail(ErrorKind::MalformedFile, origin + ": 'pairing' must be an array");
    pairing.emplace();
    for (std::size_t i = 0; i < pj.size(); ++i) {
      const Json& p = pj[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() ||
          !p[1].is_number_integer())
        fail(ErrorKind::MalformedFile,
             origin + ": pairing[" + std::to_string(i) + "] must be [int, int]");
      pairing->emplace_back(p[0].get<Index>(), p[1].get<Index>());
    }
  }
  std::string provenance = doc.value("provenance", std::string{});
  try {
    return LayerEmbeddingSet(std::move(layers), std::move(pairing), std::move(provenance));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::NonFiniteValue || e.kind() == ErrorKind::EmptyLayer)
      fail(ErrorKind::MalformedFile, origin + ": " + e.what());
    throw;
  }
}

LayerEmbeddingSet load_embeddings(const std::filesystem::path& path) {
  return parse_embeddings(read_json_file(path), path.string());
}

Json embeddings_to_json(const LayerEmbeddingSet& set) {
  const auto rows = [](const Matrix& m) {
    Json out = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      Json row = Json::array();
      for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
      out.push_back(std::move(row));
    }
    return out;
  };
  Json doc;
  doc["layers"] = Json::array();
  for (const auto& l : set.layers())
    doc["layers"].push_back({{"l", l.layer}, {"p", rows(l.source_vecs)}, {"q", rows(l.target_vecs)}});
  if (set.pairing()) {
    doc["pairing"] = Json::array();
    for (const auto& [p, q] : *set.pairing()) doc["pairing"].push_back({p, q});
  }
  if (!set.provenance().empty()) doc["provenance"] = set.provenance();
  return doc;
}

}  // namespace iwagg
