#pragma once

#include <span>
#include <vector>

namespace levytrade {

/// Local linear regression with tricube weights over the ceil(span * n)
/// nearest neighbours of each x, followed by `robustness_iterations` passes
/// of bisquare reweighting on the residuals. Returns the fit at each x.
///
/// Requires strictly increasing xs and 0 < span <= 1. Throws
/// NumericalError when a neighbourhood has zero width.
std::vector<double> loess_smooth(std::span<const double> xs, std::span<const double> ys,
                                 double span = 0.3, int robustness_iterations = 1);

}  // namespace levytrade
