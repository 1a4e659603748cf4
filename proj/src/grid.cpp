#include <algorithm>
#include <cmath>

#include "finsler/capacity.hpp"

namespace finsler {

Shape Shape::disk(Vector center, double radius) {
    Shape s;
    s.kind = Kind::disk;
    s.center = std::move(center);
    s.radius = radius;
    return s;
}

Shape Shape::box(Vector lo, Vector hi) {
    Shape s;
    s.kind = Kind::box;
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    return s;
}

Shape Shape::capsule(Vector a, Vector b, double radius) {
    Shape s;
    s.kind = Kind::capsule;
    // canonical endpoint order keeps the sdf bit-stable under endpoint swap
    bool swap = false;
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] < b[i]) break;
        if (a[i] > b[i]) {
            swap = true;
            break;
        }
    }
    s.a = swap ? b : a;
    s.b = swap ? a : b;
    s.radius = radius;
    return s;
}

double Shape::sdf(const Vector& x) const {
    switch (kind) {
        case Kind::disk:
            return (x - center).norm() - radius;
        case Kind::box: {
            double inside = -std::numeric_limits<double>::infinity();
            double outside_sq = 0.0;
            bool out = false;
            for (int i = 0; i < x.size(); ++i) {
                double d = std::max(lo[i] - x[i], x[i] - hi[i]);
                if (d > 0) {
                    out = true;
                    outside_sq += d * d;
                } else {
                    inside = std::max(inside, d);
                }
            }
            return out ? std::sqrt(outside_sq) : inside;
        }
        case Kind::capsule: {
            Vector ab = b - a;
            double t = ab.squaredNorm() > 0 ? (x - a).dot(ab) / ab.squaredNorm() : 0.0;
            t = std::min(1.0, std::max(0.0, t));
            return (x - (a + t * ab)).norm() - radius;
        }
    }
    return 0.0;
}

Box Shape::bounding_box() const {
    Box bb;
    switch (kind) {
        case Kind::disk:
            bb.lo = center.array() - radius;
            bb.hi = center.array() + radius;
            break;
        case Kind::box:
            bb.lo = lo;
            bb.hi = hi;
            break;
        case Kind::capsule:
            bb.lo = a.cwiseMin(b).array() - radius;
            bb.hi = a.cwiseMax(b).array() + radius;
            break;
    }
    return bb;
}

GridFunction::GridFunction(Box omega, std::vector<int> resolution)
    : box_(std::move(omega)), res_(std::move(resolution)) {
    long long total = 1;
    for (int r : res_) total *= r;
    values_ = Vector::Zero(total);
    mask_.assign(total, NodeMask::free_node);
}

long long GridFunction::flat_index(const std::vector<int>& idx) const {
    long long f = 0;
    for (int d = 0; d < dim(); ++d) f = f * res_[d] + idx[d];
    return f;
}

Vector GridFunction::node_coords(long long flat) const {
    Vector x(dim());
    for (int d = dim() - 1; d >= 0; --d) {
        long long i = flat % res_[d];
        flat /= res_[d];
        x[d] = box_.lo[d] + static_cast<double>(i) * spacing(d);
    }
    return x;
}

long long GridFunction::count_mask(NodeMask m) const {
    long long c = 0;
    for (auto v : mask_)
        if (v == m) ++c;
    return c;
}

void GridFunction::apply_masks() {
    for (long long i = 0; i < num_nodes(); ++i) {
        if (mask_[i] == NodeMask::fixed_one)
            values_[i] = 1.0;
        else if (mask_[i] == NodeMask::fixed_zero)
            values_[i] = 0.0;
        else
            values_[i] = std::min(1.0, std::max(0.0, values_[i]));
    }
}

GridFunction make_grid(const FinslerModel& m, const CondenserSpec& spec,
                       const std::vector<int>& resolution) {
    const int n = m.dimension();
    if (static_cast<int>(resolution.size()) != n)
        throw ConfigError("resolution must have one entry per dimension");
    for (int r : resolution)
        if (r < 8) throw ConfigError("resolution must be at least 8 per axis");
    if (spec.omega.dim() != n) throw ConfigError("omega dimension mismatch");
    if (!m.domain().contains(spec.omega.lo) || !m.domain().contains(spec.omega.hi))
        throw ConfigError("omega must lie inside the model domain");

    Box cbb = spec.inner.bounding_box();
    if (!cbb.strictly_inside(spec.omega, 1e-12))
        throw ConfigError("condenser C must lie strictly inside omega");

    GridFunction grid(spec.omega, resolution);
    const long long total = grid.num_nodes();

    long long ones = 0;
    for (long long f = 0; f < total; ++f) {
        Vector x = grid.node_coords(f);
        bool boundary = false;
        {
            long long rest = f;
            for (int d = n - 1; d >= 0; --d) {
                long long i = rest % resolution[d];
                rest /= resolution[d];
                if (i == 0 || i == resolution[d] - 1) boundary = true;
            }
        }
        bool in_c = spec.inner.contains(x);
        bool zeroed = boundary;
        if (spec.support && !(spec.support->sdf(x) < 0.0)) zeroed = true;
        if (in_c && zeroed)
            throw ConfigError("condenser C touches the zero region (support too tight)");
        if (in_c) {
            grid.set_mask(f, NodeMask::fixed_one);
            ++ones;
        } else if (zeroed) {
            grid.set_mask(f, NodeMask::fixed_zero);
        }
    }
    if (ones == 0)
        throw ConfigError("condenser C contains no grid node; resolution too coarse");

    // initial iterate: ramp in the distance field between C and the zero set
    for (long long f = 0; f < total; ++f) {
        Vector x = grid.node_coords(f);
        double d_c = std::max(0.0, spec.inner.sdf(x));
        double d_z = spec.omega.boundary_distance(x);
        if (spec.support) d_z = std::min(d_z, std::max(0.0, -spec.support->sdf(x)));
        d_z = std::max(0.0, d_z);
        double u = (d_c + d_z > 0.0) ? d_z / (d_c + d_z) : 0.0;
        grid.values()[f] = u;
    }
    grid.apply_masks();
    return grid;
}

}  // namespace finsler
