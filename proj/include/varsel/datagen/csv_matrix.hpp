#pragma once

#include <filesystem>

#include "varsel/datagen/data_matrix.hpp"

namespace varsel {

/// Reads a header row of column names followed by one numeric row per
/// observation. Empty cells become missing. Throws ParseError with the line
/// number (and column for bad cells) on malformed input, IoError when the file
/// cannot be opened.
DataMatrix load_csv_matrix(const std::filesystem::path& path);

/// Writes `m` so that load_csv_matrix returns bit-identical values; missing
/// cells are written empty.
void write_csv_matrix(const std::filesystem::path& path, const DataMatrix& m);

}  // namespace varsel
