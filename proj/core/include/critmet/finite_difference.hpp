#pragma once

#include <functional>
#include <span>

namespace critmet {

/// Finite-difference step control shared by every parameter derivative.
/// With `adaptive` set, the step is halved until two successive estimates
/// agree to `rel_tol`, and the Richardson extrapolant of the last pair is
/// returned.
struct FiniteDifference {
  double delta = 1e-4;
  bool adaptive = true;
  double rel_tol = 1e-3;
  int max_halvings = 8;
};

struct FdEstimate {
  double value = 0.0;
  double delta_used = 0.0;  // finest step evaluated
  int halvings = 0;
};

/// `estimate(h)` returns the raw finite-difference value at step h;
/// `order` is the leading power of h in its truncation error (1 for
/// one-sided, 2 for symmetric differences). Throws RegimeError if the
/// estimates never settle.
FdEstimate richardson(const std::function<double(double)>& estimate,
                      const FiniteDifference& fd, int order);

/// Value at x = 0 of the interpolating polynomial through (xs, ys).
double extrapolate_to_zero(std::span<const double> xs, std::span<const double> ys);

}  // namespace critmet
