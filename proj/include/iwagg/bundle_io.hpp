#pragma once

#include "iwagg/data_model.hpp"

#include <filesystem>

namespace iwagg {

/// Reads a bundle directory:
///
///   manifest.json                 model order, d1, d2, presence flags, provenance
///   source.csv                    id,x_1..x_d1,y_1..y_d2   (x columns optional)
///   target.csv                    id,x_1..x_d1[,y_1..y_d2] (y = oracle labels)
///   model_<name>_source.csv       id,f_1..f_d2
///   model_<name>_target.csv       id,f_1..f_d2
///
/// Every file is validated against the manifest before the bundle is built;
/// errors name the file and, where applicable, the row.
PredictionBundle load_bundle(const std::filesystem::path& dir);

/// Writes the canonical layout with 17-significant-digit numbers;
/// load_bundle(write_bundle(b)) == b exactly.
void write_bundle(const PredictionBundle& bundle, const std::filesystem::path& dir);

/// Single-column vector CSV (`id,<column>`), e.g. beta.csv.
void write_vector_csv(const Vector& v, const std::string& column, const std::filesystem::path& path);
Vector read_vector_csv(const std::filesystem::path& path);

/// Matrix CSV with header `id,<prefix>_1..<prefix>_d`.
void write_matrix_csv(const Matrix& m, const std::string& prefix, const std::filesystem::path& path);

}  // namespace iwagg
