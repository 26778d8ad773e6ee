#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "specfield/dataset.hpp"
#include "specfield/filter.hpp"

namespace specfield::harness {

inline constexpr int kResultsFormatVersion = 1;

/// Inversion output as stored on disk: the belief trajectory plus the
/// fingerprint of the dataset manifest it was computed from.
struct ResultsBundle {
  int format_version = kResultsFormatVersion;
  std::uint64_t dataset_manifest_fnv1a = 0;
  int n_modes = 0;
  filter::BeliefTrajectory trajectory;
  ordered_json config_echo;
};

void write_results(const filter::BeliefTrajectory& trajectory,
                   const DatasetManifest& dataset_manifest,
                   const ordered_json& config_echo,
                   const std::filesystem::path& dir);

ResultsBundle read_results(const std::filesystem::path& dir);

struct ReportSummary {
  int windows = 0;
  int channels = 0;
  double total_explained_variance = 0.0;
  std::vector<double> per_window_ev;
  std::vector<double> free_energy;
  bool has_truth = false;
  std::optional<double> field_correlation;
  std::optional<double> hotspot_agreement;
};

/// Compute fit and recovery metrics and write summary.json, per-window
/// field-map CSVs and SVG heatmaps into `out_dir`. Throws format_error when
/// the results were not produced from this dataset.
ReportSummary report(const ResultsBundle& results, const Dataset& dataset,
                     const std::filesystem::path& out_dir, int grid_nx = 0,
                     int grid_ny = 0);

/// Deterministic heatmap: one rect per cell, linear color scale, min/max
/// annotated. `values` is ny x nx with row 0 at the bottom.
void write_heatmap_svg(const std::filesystem::path& file, const Mat& values,
                       double vmin, double vmax, const std::string& title);

} // namespace specfield::harness
