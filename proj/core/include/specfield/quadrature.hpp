#pragma once

#include <functional>

#include "specfield/common.hpp"

namespace specfield {

/// Composite Simpson rule on [a, b]. `panels` is rounded up to the next
/// even count; each panel spans two subintervals.
double simpson(const std::function<double(double)>& f, double a, double b,
               int panels);

/// Node weights of the composite Simpson rule on n+1 equispaced points
/// (n even), scaled so that w.dot(f(nodes)) integrates over [a, b].
Vec simpson_weights(double a, double b, int subintervals);

} // namespace specfield
