#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "specfield/common.hpp"
#include "specfield/field.hpp"
#include "specfield/window.hpp"

namespace specfield::harness {

using ordered_json = nlohmann::ordered_json;

inline constexpr int kDatasetFormatVersion = 1;

/// Regular electrode array; positions are absolute coordinates inside the
/// simulation domain, row-major (row index slow, column fast).
struct ElectrodeLayout {
  int rows = 0;
  int cols = 0;
  double spacing = 0.0;
  std::vector<field::Point> positions;

  int channels() const { return rows * cols; }
};

struct DatasetManifest {
  int format_version = kDatasetFormatVersion;
  std::uint64_t seed = 0;
  Vec freqs_hz;
  std::vector<double> window_times;
  ElectrodeLayout layout;
  field::DomainSpec domain;
  int n_modes_per_axis = 4;
  bool has_ground_truth = false;
  ordered_json config_echo; ///< full simulation config as written
};

/// Ground truth attached to simulated datasets. `coeffs` is empty (0 x 0)
/// for scenes that are not coefficient-based (boundary-driven 1D).
struct GroundTruth {
  Mat coeffs;               ///< windows x modes
  Vec g7_offsets;           ///< windows
  Mat field_at_electrodes;  ///< windows x channels
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<SpectralWindow> windows;
  std::optional<GroundTruth> truth;
};

/// Canonical serialization of a double: shortest 17-significant-digit form
/// used by every CSV writer, so write -> read -> write is byte identical.
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view bytes);

/// Canonical manifest JSON text (also the bytes that get hashed into
/// results bundles).
std::string manifest_to_string(const DatasetManifest& manifest);

/// RFC-4180 matrix file: CRLF line endings, header row, one id per row.
void write_matrix_csv(const std::filesystem::path& file, const Mat& values,
                      const std::string& corner,
                      const std::vector<std::string>& col_headers,
                      const std::vector<std::string>& row_ids);

/// Reads a matrix CSV written by write_matrix_csv. Column headers and row
/// ids are returned through the optional out-parameters.
Mat read_matrix_csv(const std::filesystem::path& file,
                    std::vector<std::string>* col_headers = nullptr,
                    std::vector<std::string>* row_ids = nullptr);

void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

} // namespace specfield::harness
