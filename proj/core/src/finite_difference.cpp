#include "critmet/finite_difference.hpp"

#include <cmath>
#include <string>

#include "critmet/error.hpp"

namespace critmet {

FdEstimate richardson(const std::function<double(double)>& estimate,
                      const FiniteDifference& fd, int order) {
  if (!(fd.delta > 0.0)) throw DomainError("finite-difference step must be positive");
  if (order < 1) throw DomainError("truncation order must be positive");

  double h = fd.delta;
  double coarse = estimate(h);
  if (!fd.adaptive) return {coarse, h, 0};

  const double weight = std::ldexp(1.0, order);  // 2^order
  for (int k = 1; k <= fd.max_halvings; ++k) {
    h *= 0.5;
    const double fine = estimate(h);
    if (std::abs(fine - coarse) <= fd.rel_tol * std::abs(fine)) {
      return {(weight * fine - coarse) / (weight - 1.0), h, k};
    }
    coarse = fine;
  }
  throw RegimeError("finite-difference estimates did not settle after " +
                    std::to_string(fd.max_halvings) + " halvings from step " +
                    std::to_string(fd.delta));
}

double extrapolate_to_zero(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.empty()) {
    throw DomainError("extrapolation needs matching, non-empty abscissae and values");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double basis = 1.0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (j == i) continue;
      if (xs[i] == xs[j]) throw DomainError("extrapolation abscissae must be distinct");
      basis *= (0.0 - xs[j]) / (xs[i] - xs[j]);
    }
    total += basis * ys[i];
  }
  return total;
}

}  // namespace critmet
