#include "near/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "near/errors.hpp"

namespace near {

namespace {

constexpr std::uint32_t kMagicImages = 0x00000803;  // unsigned byte, rank 3
constexpr std::uint32_t kMagicLabels = 0x00000801;  // unsigned byte, rank 1

std::uint32_t read_u32_be(std::istream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) {
    throw TruncatedFile("unexpected end of file while reading " + what);
  }
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

void write_u32_be(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::vector<unsigned char> read_payload(std::istream& in, std::uint64_t count) {
  std::vector<unsigned char> bytes(count);
  if (!in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(count))) {
    throw TruncatedFile("payload shorter than the declared dimensions");
  }
  return bytes;
}

}  // namespace

Dataset load_idx(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open " + path);

  const std::uint32_t magic = read_u32_be(in, "magic");
  Dataset dataset;
  dataset.name = std::filesystem::path(path).filename().string();

  if (magic == kMagicImages) {
    const std::uint64_t count = read_u32_be(in, "sample count");
    const std::uint64_t height = read_u32_be(in, "row count");
    const std::uint64_t width = read_u32_be(in, "column count");
    if (count == 0 || height == 0 || width == 0) {
      throw DimensionOverflow("zero-sized dimension");
    }
    const std::uint64_t per_image = height * width;
    if (per_image > (1ULL << 32) || count * per_image > (1ULL << 36)) {
      throw DimensionOverflow("tensor of " + std::to_string(count) + "x" +
                              std::to_string(height) + "x" + std::to_string(width) +
                              " exceeds supported size");
    }
    const auto bytes = read_payload(in, count * per_image);

    Matrix features(count, per_image);
    auto& data = features.data();
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      data[i] = static_cast<double>(bytes[i]) / 255.0;
    }
    dataset.features = std::move(features);
    dataset.image_shape = ImageShape{width, height, 1};
  } else if (magic == kMagicLabels) {
    const std::uint64_t count = read_u32_be(in, "label count");
    if (count == 0) throw DimensionOverflow("zero-sized dimension");
    if (count > (1ULL << 36)) throw DimensionOverflow("label vector too large");
    const auto bytes = read_payload(in, count);

    Matrix features(count, 1);
    for (std::size_t i = 0; i < bytes.size(); ++i) {
      features(i, 0) = static_cast<double>(bytes[i]);
    }
    dataset.features = std::move(features);
  } else {
    std::ostringstream msg;
    msg << "unsupported IDX magic 0x" << std::hex << magic;
    throw BadMagic(msg.str());
  }
  return dataset;
}

void write_idx(const Dataset& dataset, const std::string& path) {
  if (!dataset.image_shape || dataset.image_shape->channels != 1) {
    throw std::invalid_argument("write_idx requires a single-channel image dataset");
  }
  const auto& shape = *dataset.image_shape;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileNotFound("cannot create " + path);

  write_u32_be(out, kMagicImages);
  write_u32_be(out, static_cast<std::uint32_t>(dataset.features.rows()));
  write_u32_be(out, static_cast<std::uint32_t>(shape.height));
  write_u32_be(out, static_cast<std::uint32_t>(shape.width));

  std::vector<unsigned char> bytes;
  bytes.reserve(dataset.features.size());
  for (double v : dataset.features.data()) {
    const double scaled = std::clamp(v, 0.0, 1.0) * 255.0;
    bytes.push_back(static_cast<unsigned char>(std::lround(scaled)));
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed to write " + path);
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_cell(const std::string& cell, double* out) {
  if (cell.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size()) return false;
  if (!std::isfinite(v)) return false;
  *out = v;
  return true;
}

struct RawCsv {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<double>> rows;
};

RawCsv read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound("cannot open " + path);

  RawCsv csv;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_data_row = true;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_row(line);

    if (first_data_row) {
      // Header heuristic: a first row with any non-numeric cell is a header.
      bool numeric = true;
      double ignored;
      for (const auto& c : cells) {
        if (!parse_cell(c, &ignored)) {
          numeric = false;
          break;
        }
      }
      width = cells.size();
      first_data_row = false;
      if (!numeric) {
        csv.header = cells;
        continue;
      }
    }

    if (cells.size() != width) {
      throw RaggedRows("row " + std::to_string(line_no) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(width));
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (!parse_cell(cells[c], &row[c])) {
        throw NonNumericCell("row " + std::to_string(line_no) + ", column " +
                             std::to_string(c + 1) + ": '" + cells[c] + "'");
      }
    }
    csv.rows.push_back(std::move(row));
  }

  if (csv.rows.empty()) throw TruncatedFile("no data rows in " + path);
  return csv;
}

Matrix rows_to_matrix(const std::vector<std::vector<double>>& rows) {
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

}  // namespace

Dataset load_csv(const std::string& path) {
  const RawCsv csv = read_csv(path);
  Dataset dataset;
  dataset.name = std::filesystem::path(path).filename().string();
  dataset.features = rows_to_matrix(csv.rows);
  return dataset;
}

CsvTable load_csv_table(const std::string& path) {
  const RawCsv csv = read_csv(path);
  CsvTable table;
  table.values = rows_to_matrix(csv.rows);
  if (!csv.header.empty()) {
    if (csv.header.size() != table.values.cols()) {
      throw RaggedRows("header width differs from data width");
    }
    table.columns = csv.header;
  } else {
    for (std::size_t c = 0; c < table.values.cols(); ++c) {
      table.columns.push_back("col" + std::to_string(c));
    }
  }
  return table;
}

void standardize_features(Dataset& dataset) {
  Matrix& m = dataset.features;
  const std::size_t n = m.rows();
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += m(r, c);
    mean /= static_cast<double>(n);

    double var = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = m(r, c) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);

    if (sd < 1e-12) {
      for (std::size_t r = 0; r < n; ++r) m(r, c) = 0.0;
    } else {
      for (std::size_t r = 0; r < n; ++r) m(r, c) = (m(r, c) - mean) / sd;
    }
  }
  dataset.standardized = true;
}

}  // namespace near
