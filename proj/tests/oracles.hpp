#pragma once

// Test-side finite-difference oracles, independent of the dual-number
// evaluation path they are used to check. Central differences with one
// Richardson extrapolation step.

#include <functional>

#include "finsler/types.hpp"

namespace finsler::test {

using Fn = std::function<double(const Vector&)>;

inline double fd1(const Fn& f, const Vector& x, int i, double h = 1e-4) {
    auto central = [&](double step) {
        Vector xp = x, xm = x;
        xp[i] += step;
        xm[i] -= step;
        return (f(xp) - f(xm)) / (2.0 * step);
    };
    return (4.0 * central(h / 2) - central(h)) / 3.0;
}

// second differences lose half the significant digits, so the step sits
// near eps^(1/6) rather than the first-difference 1e-4
inline double fd2(const Fn& f, const Vector& x, int i, int j, double h = 1.5e-3) {
    if (i == j) {
        auto second = [&](double step) {
            Vector xp = x, xm = x;
            xp[i] += step;
            xm[i] -= step;
            return (f(xp) - 2.0 * f(x) + f(xm)) / (step * step);
        };
        return (4.0 * second(h / 2) - second(h)) / 3.0;
    }
    auto mixed = [&](double step) {
        Vector a = x, b = x, c = x, d = x;
        a[i] += step; a[j] += step;
        b[i] += step; b[j] -= step;
        c[i] -= step; c[j] += step;
        d[i] -= step; d[j] -= step;
        return (f(a) - f(b) - f(c) + f(d)) / (4.0 * step * step);
    };
    return (4.0 * mixed(h / 2) - mixed(h)) / 3.0;
}

inline double rel_err(double got, double want) {
    double scale = std::max({1.0, std::abs(got), std::abs(want)});
    return std::abs(got - want) / scale;
}

}  // namespace finsler::test
