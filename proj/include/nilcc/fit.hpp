#pragma once

#include <vector>

namespace nilcc {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double rms = 0;           // root mean square residual
  double slope_stderr = 0;  // standard error of the slope (0 with two points)
  std::size_t points = 0;
};

/// Ordinary least squares y ~ slope * x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Fit of log(y) against log(x); points with nonpositive x or y are skipped.
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace nilcc
