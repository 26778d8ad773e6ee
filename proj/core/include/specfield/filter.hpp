#pragma once

#include <span>
#include <vector>

#include "specfield/filter_config.hpp"
#include "specfield/vl.hpp"
#include "specfield/window.hpp"

namespace specfield::filter {

struct WindowRecord {
  double t = 0.0;
  vl::GaussianBelief prior;
  vl::InversionReport report;
};

struct BeliefTrajectory {
  std::vector<WindowRecord> windows;
};

/// Push a posterior through the between-window dynamics: field-coefficient
/// means decay by e^{-lambda dt}, the g7 mean persists (random walk), and
/// the covariance becomes D Q D^T + R with D the diagonal decay map
/// (identity on g7). With cfg.paper_literal_prediction the covariance is
/// the undecayed Q + R instead.
vl::GaussianBelief predict_prior(const vl::GaussianBelief& post,
                                 const FilterConfig& cfg);

/// Sequential inversion of time-ordered windows. The first window uses
/// `init` as its prior; later windows use the propagated previous
/// posterior. Non-converged windows are recorded and the filter continues
/// with their (possibly regularized) posterior.
BeliefTrajectory run_filter(std::span<const SpectralWindow> windows,
                            const vl::GaussianBelief& init,
                            const FilterConfig& cfg);

/// Posterior-mean field maps on a regular grid over the closed domain.
/// Frames are ny x nx (row i = y grid index); ny is 1 for intervals.
struct FieldMovie {
  std::vector<Mat> frames;
  Vec grid_x;
  Vec grid_y;
};

FieldMovie field_movie(const BeliefTrajectory& traj,
                       const field::EigenBasis& basis, int nx, int ny);

} // namespace specfield::filter
