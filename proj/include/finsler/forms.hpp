#pragma once

#include <bit>
#include <cstdint>
#include <vector>

namespace finsler {

// Exterior form on an m-dimensional coordinate patch, stored densely by
// index-subset bitmask. m stays tiny here (2n-1 <= 5), so the 2^m table
// is the simplest faithful representation of antisymmetric coefficients.
class Form {
  public:
    Form(int dim, int degree)
        : dim_(dim), deg_(degree), c_(std::size_t(1) << dim, 0.0) {}

    int dim() const { return dim_; }
    int degree() const { return deg_; }

    double& operator[](std::uint32_t mask) { return c_[mask]; }
    double operator[](std::uint32_t mask) const { return c_[mask]; }

    // accumulate v * dz^i ^ dz^k with i, k in any order
    void add_pair(int i, int k, double v) {
        if (i == k) return;
        if (i < k)
            c_[(1u << i) | (1u << k)] += v;
        else
            c_[(1u << k) | (1u << i)] -= v;
    }

  private:
    int dim_, deg_;
    std::vector<double> c_;
};

// sign of merging the (sorted) index sets a and b into one sorted set
inline int wedge_sign(std::uint32_t a, std::uint32_t b) {
    int inv = 0;
    for (std::uint32_t m = b; m;) {
        int bit = std::countr_zero(m);
        m &= m - 1;
        inv += std::popcount(a >> (bit + 1));
    }
    return (inv & 1) ? -1 : 1;
}

inline Form wedge(const Form& f, const Form& g) {
    Form r(f.dim(), f.degree() + g.degree());
    const std::uint32_t total = 1u << f.dim();
    for (std::uint32_t a = 0; a < total; ++a) {
        if (std::popcount(a) != f.degree()) continue;
        double ca = f[a];
        if (ca == 0.0) continue;
        for (std::uint32_t b = 0; b < total; ++b) {
            if (std::popcount(b) != g.degree()) continue;
            if (a & b) continue;
            double cb = g[b];
            if (cb == 0.0) continue;
            r[a | b] += wedge_sign(a, b) * ca * cb;
        }
    }
    return r;
}

}  // namespace finsler
