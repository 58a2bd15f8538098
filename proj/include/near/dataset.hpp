#pragma once

#include <optional>
#include <string>
#include <vector>

#include "near/linalg.hpp"
#include "near/netdef.hpp"

namespace near {

// Feature matrix (samples x input_dim) plus the image shape when the source
// was an image tensor file.
struct Dataset {
  Matrix features;
  std::optional<ImageShape> image_shape;
  std::string name;
  bool standardized = false;
};

// Parses the IDX binary format: big-endian magic (0x00000803 for unsigned-byte
// rank-3 image tensors, 0x00000801 for unsigned-byte label vectors), big-endian
// 32-bit dimension sizes, then the raw payload. Image pixels are scaled to
// [0, 1]; label values are kept as-is in a single feature column.
// Throws FileNotFound, BadMagic, TruncatedFile, DimensionOverflow.
Dataset load_idx(const std::string& path);

// Writes a single-channel image dataset back to IDX (magic 0x00000803),
// rescaling features from [0, 1] to bytes.
void write_idx(const Dataset& dataset, const std::string& path);

// Rectangular numeric CSV with optional header (auto-detected by a
// non-numeric first row). Throws RaggedRows and NonNumericCell with the
// offending location.
Dataset load_csv(const std::string& path);

// CSV with named columns, for score/accuracy tables.
struct CsvTable {
  std::vector<std::string> columns;
  Matrix values;  // rows x columns
};
CsvTable load_csv_table(const std::string& path);

// In-place per-feature z-score; constant features become zero.
void standardize_features(Dataset& dataset);

}  // namespace near
