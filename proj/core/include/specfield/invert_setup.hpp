#pragma once

#include "specfield/dataset.hpp"
#include "specfield/filter.hpp"

namespace specfield::harness {

/// Everything run_filter needs, assembled from a dataset manifest and an
/// optional JSON override object (the `invert --config` file).
struct InvertSetup {
  filter::FilterConfig cfg;
  vl::GaussianBelief init;
  ordered_json echo; ///< fully resolved settings, stored in the results
};

InvertSetup make_invert_setup(const DatasetManifest& manifest,
                              const ordered_json& overrides);

} // namespace specfield::harness
