#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "parafreq/error.hpp"

namespace parafreq {

/// Composite Simpson on a uniform grid of spacing h. An odd interval count
/// finishes with the 3/8 rule on the last three intervals.
inline double simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  require(n >= 2, ErrorCode::InvalidArgument, "Simpson needs at least two samples");
  const std::size_t intervals = n - 1;
  if (intervals == 1) return 0.5 * h * (f[0] + f[1]);
  if (intervals == 3) return 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]);
  const std::size_t even_end = intervals % 2 == 0 ? intervals : intervals - 3;
  double s = 0.0;
  for (std::size_t i = 0; i + 2 <= even_end; i += 2) s += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
  if (even_end != intervals) {
    const std::size_t i = even_end;
    s += 3.0 * h / 8.0 * (f[i] + 3.0 * f[i + 1] + 3.0 * f[i + 2] + f[i + 3]);
  }
  return s;
}

/// Running integral F_i = int_{x_0}^{x_i} f on a uniform grid, exact for
/// cubics: Simpson pairs, with the step to odd nodes taken from the cubic
/// through four neighbouring samples.
inline std::vector<double> cumulative_simpson(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  std::vector<double> F(n, 0.0);
  if (n < 2) return F;
  if (n == 2) {
    F[1] = 0.5 * h * (f[0] + f[1]);
    return F;
  }
  for (std::size_t i = 2; i < n; i += 2) F[i] = F[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
  for (std::size_t i = 1; i < n; i += 2) {
    if (i + 2 < n)
      F[i] = F[i - 1] + h / 24.0 * (9.0 * f[i - 1] + 19.0 * f[i] - 5.0 * f[i + 1] + f[i + 2]);
    else if (i >= 3)
      F[i] = F[i - 1] + h / 24.0 * (f[i - 3] - 5.0 * f[i - 2] + 19.0 * f[i - 1] + 9.0 * f[i]);
    else if (i + 1 < n)
      F[i] = F[i - 1] + h / 12.0 * (5.0 * f[i - 1] + 8.0 * f[i] - f[i + 1]);
    else
      F[i] = F[i - 1] + h / 12.0 * (-f[i - 2] + 8.0 * f[i - 1] + 5.0 * f[i]);
  }
  return F;
}

}  // namespace parafreq
