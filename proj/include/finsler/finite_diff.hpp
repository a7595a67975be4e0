#pragma once

// Central finite differences for mixed partials — the independent oracle
// the jet engine is checked against.  Accuracy degrades with the order of
// the requested partial; it never aborts.

#include <functional>
#include <span>
#include <vector>

namespace finsler {

using ScalarMap = std::function<double(std::span<const double>)>;

namespace detail {

inline double fd_recurse(const ScalarMap& f, std::vector<double>& point,
                         std::span<const int> multi_index, double step, int from_var) {
  for (std::size_t v = from_var; v < multi_index.size(); ++v) {
    if (multi_index[v] == 0) continue;
    std::vector<int> reduced(multi_index.begin(), multi_index.end());
    reduced[v] -= 1;
    point[v] += step;
    double hi = fd_recurse(f, point, reduced, step, static_cast<int>(v));
    point[v] -= 2 * step;
    double lo = fd_recurse(f, point, reduced, step, static_cast<int>(v));
    point[v] += step;
    return (hi - lo) / (2 * step);
  }
  return f(point);
}

}  // namespace detail

// Nested central-difference estimate of d^|multi_index| f / dz^multi_index.
inline double finite_difference(const ScalarMap& f, std::span<const double> point,
                                std::span<const int> multi_index, double step) {
  std::vector<double> p(point.begin(), point.end());
  return detail::fd_recurse(f, p, multi_index, step, 0);
}

// One Richardson extrapolation step kills the O(h^2) truncation term:
// (4 D(h/2) - D(h)) / 3.  Needed for third-order partials, where no single
// step balances truncation against roundoff at 1e-5 relative.
inline double finite_difference_richardson(const ScalarMap& f, std::span<const double> point,
                                           std::span<const int> multi_index, double step) {
  double coarse = finite_difference(f, point, multi_index, step);
  double fine = finite_difference(f, point, multi_index, step / 2);
  return (4.0 * fine - coarse) / 3.0;
}

// Step sizes tuned per derivative order for ~1e-5 relative agreement on
// O(1) quantities.
inline double fd_step_for_order(int order) {
  switch (order) {
    case 0:
    case 1:
      return 1e-5;
    case 2:
      return 1e-4;
    default:
      return 2e-3;  // paired with Richardson extrapolation
  }
}

inline double finite_difference(const ScalarMap& f, std::span<const double> point,
                                std::span<const int> multi_index) {
  int total = 0;
  for (int m : multi_index) total += m;
  if (total >= 3)
    return finite_difference_richardson(f, point, multi_index, fd_step_for_order(total));
  return finite_difference(f, point, multi_index, fd_step_for_order(total));
}

}  // namespace finsler
