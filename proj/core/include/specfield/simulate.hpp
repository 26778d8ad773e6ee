#pragma once

#include <variant>

#include "specfield/cmc.hpp"
#include "specfield/dataset.hpp"

namespace specfield::harness {

/// Gaussian excitability bump whose amplitude ramps up over most of the
/// recording and then collapses. Center and width are relative to the
/// domain lengths.
struct BumpScenario {
  double center_rx = 0.55;
  double center_ry = 0.55;
  double width_rel = 0.18;
  double amp_floor = 0.10;
  double amp_peak = 0.80;
  double amp_end = 0.15;
  double rise_fraction = 0.75;
};

/// Explicit per-window mode coefficients (windows x modes).
struct CoeffScenario {
  Mat coeffs;
};

/// Appendix-style 1D scene: the ground-truth field is the boundary-driven
/// heat solution, sampled at the window midpoints. Boundary time courses
/// are offset + amplitude * sin(2 pi t / period + phase).
struct SinusoidBoundary {
  double offset = 0.0;
  double amplitude = 0.0;
  double period = 10.0;
  double phase = 0.0;

  double operator()(double t) const;
};

struct Boundary1dScenario {
  SinusoidBoundary phi0;
  SinusoidBoundary phi1;
};

using Scenario = std::variant<BumpScenario, CoeffScenario, Boundary1dScenario>;

struct SimConfig {
  std::uint64_t seed = 0;
  bool seed_set = false; ///< seed is mandatory; parsing enforces it

  int rows = 4;
  int cols = 5;
  double spacing = 0.25;

  double margin_factor = 0.2; ///< Dirichlet margin around the array bbox
  double alpha = 0.05;
  int n_modes_per_axis = 4;

  int n_windows = 20;
  double dt_window = 1.0;

  double f_start = 1.0;
  double f_stop = 60.0;
  double f_step = 1.0;

  double obs_log10_sd = 0.02;
  int spectral_averages = 1;
  double mode_noise_var = 1e-4;
  double g7_white_var = 1e-4;

  cmc::CmcParams cmc_params;
  Scenario scenario = BumpScenario{};

  void validate() const;
};

/// The pinned desk-scale scene: 4x5 array, 20 windows at 1 s, 1-60 Hz,
/// rising-then-collapsing bump, fixed seed.
SimConfig default_scene_config();

ordered_json sim_config_to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const ordered_json& j);

/// Electrode grid plus the surrounding Dirichlet-zero domain (the domain
/// extends `margin_factor` of the bounding box beyond the array on each
/// side). Single-row or single-column arrays produce an interval domain.
struct SceneGeometry {
  ElectrodeLayout layout;
  field::DomainSpec domain;
};
SceneGeometry build_geometry(const SimConfig& cfg);

/// Generate a synthetic dataset: evolve the ground-truth field, draw the
/// g7 white-noise sequence, evaluate per-channel spectra and add log-domain
/// observation noise. Same seed, same bytes.
Dataset simulate(const SimConfig& cfg);

} // namespace specfield::harness
