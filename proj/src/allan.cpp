#include <cmath>
#include <vector>

#include "corrspec/errors.hpp"
#include "corrspec/estimation.hpp"

namespace corrspec {

// Overlapping estimator on fractional-frequency samples:
//   sigma^2(m tau0) = sum_j (ybar_{j+m} - ybar_j)^2 / (2 (N - 2m + 1))
// with ybar_j the mean of y[j .. j+m).
std::vector<AllanPoint> allan_deviation(std::span<const double> y, double sample_period_s) {
  detail::require(y.size() >= 3, "Allan deviation needs at least 3 samples");
  detail::require(sample_period_s > 0.0, "sample period must be > 0");
  const std::size_t n = y.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    detail::require(std::isfinite(y[i]), "samples must be finite");
    prefix[i + 1] = prefix[i] + y[i];
  }
  std::vector<AllanPoint> out;
  for (std::size_t m = 1; 2 * m <= n; m *= 2) {
    const std::size_t terms = n - 2 * m + 1;
    const double inv_m = 1.0 / static_cast<double>(m);
    double sum = 0.0;
    for (std::size_t j = 0; j < terms; ++j) {
      const double first = (prefix[j + m] - prefix[j]) * inv_m;
      const double second = (prefix[j + 2 * m] - prefix[j + m]) * inv_m;
      sum += (second - first) * (second - first);
    }
    out.push_back({static_cast<double>(m) * sample_period_s,
                   std::sqrt(sum / (2.0 * static_cast<double>(terms))), terms});
  }
  return out;
}

} // namespace corrspec
