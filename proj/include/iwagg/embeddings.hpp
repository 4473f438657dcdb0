#pragma once

#include "iwagg/data_model.hpp"
#include "iwagg/text_io.hpp"

#include <filesystem>

namespace iwagg {

/// Parses an embedding dump:
///   {"layers":[{"l":1,"p":[[...],...],"q":[[...],...]}, ...],
///    "pairing":[[i,j], ...], "provenance": "..."}
/// `pairing` and `provenance` are optional. Layers come back sorted by `l`.
LayerEmbeddingSet parse_embeddings(const Json& doc, const std::string& origin = "embeddings");
LayerEmbeddingSet load_embeddings(const std::filesystem::path& path);

Json embeddings_to_json(const LayerEmbeddingSet& set);

}  // namespace iwagg
