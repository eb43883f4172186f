#pragma once

// Shared helpers for the test suites: deterministic uniforms and the
// central-difference oracles the expected values are checked against.

#include <array>
#include <cmath>
#include <functional>
#include <random>

#include "calabi/jet.hpp"

namespace calabi::testing {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = double(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

using Fn4 = std::function<double(const Point4&)>;

inline double fd_partial(const Fn4& f, Point4 p, int dim, double h) {
    Point4 a = p, b = p;
    a[std::size_t(dim)] += h;
    b[std::size_t(dim)] -= h;
    return (f(a) - f(b)) / (2.0 * h);
}

inline double fd_partial2(const Fn4& f, Point4 p, int dim, double h) {
    Point4 a = p, b = p;
    a[std::size_t(dim)] += h;
    b[std::size_t(dim)] -= h;
    return (f(a) - 2.0 * f(p) + f(b)) / (h * h);
}

inline double fd_mixed(const Fn4& f, Point4 p, int d1, int d2, double h) {
    auto shift = [&](double s1, double s2) {
        Point4 q = p;
        q[std::size_t(d1)] += s1;
        q[std::size_t(d2)] += s2;
        return f(q);
    };
    return (shift(h, h) - shift(h, -h) - shift(-h, h) + shift(-h, -h)) / (4.0 * h * h);
}

inline double fd_laplacian_xy(const Fn4& f, Point4 p, double h) {
    return fd_partial2(f, p, 0, h) + fd_partial2(f, p, 1, h);
}

inline double rel_err(double got, double want) {
    const double scale = std::max({std::abs(got), std::abs(want), 1.0});
    return std::abs(got - want) / scale;
}

}  // namespace calabi::testing
