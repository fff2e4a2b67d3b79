#pragma once

#include <vector>

namespace fch {

/// Gauss-Legendre rule mapped to the unit interval [0, 1].
struct GaussRule {
    std::vector<double> points;
    std::vector<double> weights;

    [[nodiscard]] int size() const noexcept { return static_cast<int>(points.size()); }
};

/// `order` points, exact for polynomials of degree 2*order - 1. Nodes come
/// from Newton iteration on the Legendre recurrence.
[[nodiscard]] GaussRule gauss_legendre_unit(int order);

} // namespace fch
