#pragma once
// Sampled-data utilities: power-law fits on log-log axes and finite-difference
// differentiation on arbitrary nodes.

#include <vector>

#include "cmlab/common.hpp"

namespace cmlab {

struct FitResult {
  double exponent = 0.0;
  double prefactor = 0.0;
  double r_squared = 0.0;  // in [0, 1]
  double window_lo = 0.0;  // x-range actually used
  double window_hi = 0.0;
  double t_estimate = 0.0;  // filled by physical-time rate fits
};

// Least squares of log y against log x.  Requires >= 16 points spanning at
// least one decade in x, everything positive and finite.
FitResult fit_power_law(const std::vector<double>& xs,
                        const std::vector<double>& ys);

// First derivative of f sampled at strictly increasing nodes x, via sliding
// `stencil`-point Fornberg weights (stencils become one-sided near the ends).
std::vector<double> fd_derivative(const std::vector<double>& x,
                                  const std::vector<double>& f,
                                  int stencil = 9);

}  // namespace cmlab
