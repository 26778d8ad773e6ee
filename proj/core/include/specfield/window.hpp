#pragma once

#include <vector>

#include "specfield/common.hpp"
#include "specfield/field.hpp"

namespace specfield {

/// One time window of observed data: channel-major power matrix on a shared
/// frequency grid (the grid lives in the dataset manifest / filter config).
struct SpectralWindow {
  double t = 0.0;
  std::vector<field::Point> positions; ///< one per channel
  Mat power;                           ///< channels x freqs, linear power
};

} // namespace specfield
