#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace topomap {

/// Linear-interpolation quantile over n sorted values, evaluated at rank
/// q*(n-1) between adjacent order statistics. `nth(k)` must return the k-th
/// smallest value (0-based). Every quantile in the library goes through here.
template <class NthFn>
double interpolated_quantile(std::size_t n, double q, NthFn&& nth) {
    if (n == 0) {
        throw std::invalid_argument("quantile of an empty set");
    }
    if (!(q >= 0.0 && q <= 1.0)) {
        throw std::invalid_argument("quantile level outside [0, 1]");
    }
    const double rank = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const double frac = rank - static_cast<double>(lo);
    const double lo_value = static_cast<double>(nth(lo));
    if (frac == 0.0 || lo + 1 >= n) {
        return lo_value;
    }
    const double hi_value = static_cast<double>(nth(lo + 1));
    return lo_value + frac * (hi_value - lo_value);
}

}  // namespace topomap
