#include "finsler/model.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <sstream>

namespace finsler {

namespace {

constexpr double kMinDirection = 1e-8;   // TM_0: stay away from the zero section
constexpr double kFdStep = 1e-5;         // central-difference step, Richardson-extrapolated
constexpr double kRandersMargin = 1e-6;  // required slack in ||b||_a < 1

std::string point_str(const Vector& v) {
    std::ostringstream os;
    os << "(";
    for (int i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
    os << ")";
    return os.str();
}

void check_dims(const FinslerModel& m, const Vector& x, const Vector& y) {
    if (x.size() != m.dimension() || y.size() != m.dimension())
        throw ModelError("point/direction dimension does not match model dimension " +
                         std::to_string(m.dimension()));
}

void check_direction(const Vector& y) {
    if (y.lpNorm<Eigen::Infinity>() < kMinDirection)
        throw ModelError("direction too close to zero: y = " + point_str(y));
}

void check_in_domain(const FinslerModel& m, const Vector& x) {
    if (!m.domain().contains(x))
        throw ModelError("point outside chart domain: x = " + point_str(x));
}

void check_interior(const FinslerModel& m, const Vector& x) {
    double margin = 1e-6 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
    if (m.domain().boundary_distance(x) < margin)
        throw ModelError("point not interior to chart domain: x = " + point_str(x));
}

using Impl = FinslerModel::Impl;

// half the y-Hessian of F^2 through nested duals
Matrix hessian_half(const Impl& im, const Vector& x, const Vector& y) {
    const int n = im.n;
    Matrix g(n, n);
    VectorT<Dual2> xd(n), yd(n);
    for (int k = 0; k < n; ++k) xd[k] = Dual2(Dual1(x[k], 0.0), Dual1(0.0, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            for (int k = 0; k < n; ++k)
                yd[k] = Dual2(Dual1(y[k], k == i ? 1.0 : 0.0), Dual1(k == j ? 1.0 : 0.0, 0.0));
            Dual2 r = FinslerModel::value_sq_impl(im, xd, yd);
            g(i, j) = g(j, i) = 0.5 * r.d.d;
        }
    return g;
}

Matrix fundamental_impl(const Impl& im, const Vector& x, const Vector& y) {
    if (im.family == Family::conformal_scaled) {
        double s = im.sigma(x);
        return std::exp(2.0 * s) * fundamental_impl(*im.base, x, y);
    }
    return hessian_half(im, x, y);
}

Matrix spd_inverse(const Matrix& g, const Vector& x, const Vector& y) {
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success)
        throw ModelError("fundamental tensor not positive definite at x = " + point_str(x) +
                         ", y = " + point_str(y));
    Matrix inv = llt.solve(Matrix::Identity(g.rows(), g.cols()));
    return 0.5 * (inv + inv.transpose());
}

Matrix inverse_impl(const Impl& im, const Vector& x, const Vector& y) {
    if (im.family == Family::conformal_scaled) {
        double s = im.sigma(x);
        return std::exp(-2.0 * s) * inverse_impl(*im.base, x, y);
    }
    Matrix g = fundamental_impl(im, x, y);
    return spd_inverse(g, x, y);
}

// Richardson-extrapolated central difference of a matrix-valued map
template <class F>
Matrix richardson(F&& at, double h) {
    Matrix d1 = (at(h) - at(-h)) / (2.0 * h);
    Matrix d2 = (at(h / 2.0) - at(-h / 2.0)) / h;
    return (4.0 * d2 - d1) / 3.0;
}

Tensor3 cartan_impl(const Impl& im, const Vector& x, const Vector& y) {
    const int n = im.n;
    if (im.family == Family::riemannian) return Tensor3(n, Tensor3::Symmetry::total);
    if (im.family == Family::conformal_scaled) {
        Tensor3 c = cartan_impl(*im.base, x, y);
        double s = std::exp(2.0 * im.sigma(x));
        Tensor3 out(n, Tensor3::Symmetry::total);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) out(i, j, k) = s * c(i, j, k);
        return out;
    }
    // y-dependent family: one finite-difference layer over the exact Hessian
    double h = kFdStep * std::max(1.0, y.lpNorm<Eigen::Infinity>());
    std::vector<Matrix> dg(n);
    for (int k = 0; k < n; ++k)
        dg[k] = richardson(
            [&](double t) {
                Vector ys = y;
                ys[k] += t;
                return hessian_half(im, x, ys);
            },
            h);
    Tensor3 c(n, Tensor3::Symmetry::total);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                double v = (0.5 * dg[k](i, j) + 0.5 * dg[i](j, k) + 0.5 * dg[j](k, i)) / 3.0;
                c(i, j, k) = c(i, k, j) = c(j, i, k) = c(j, k, i) = c(k, i, j) = c(k, j, i) = v;
            }
    return c;
}

std::vector<Matrix> dgdx_impl(const Impl& im, const Vector& x, const Vector& y) {
    const int n = im.n;
    std::vector<Matrix> dg(n);
    switch (im.family) {
        case Family::riemannian:
            for (int k = 0; k < n; ++k) {
                dg[k].resize(n, n);
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j)
                        dg[k](i, j) = dg[k](j, i) = im.a_field(i, j).derivative(x, k);
            }
            return dg;
        case Family::randers: {
            double h = kFdStep * std::max(1.0, x.lpNorm<Eigen::Infinity>());
            for (int k = 0; k < n; ++k)
                dg[k] = richardson(
                    [&](double t) {
                        Vector xs = x;
                        xs[k] += t;
                        return hessian_half(im, xs, y);
                    },
                    h);
            return dg;
        }
        case Family::conformal_scaled: {
            std::vector<Matrix> base = dgdx_impl(*im.base, x, y);
            Matrix gb = fundamental_impl(*im.base, x, y);
            double s2 = std::exp(2.0 * im.sigma(x));
            for (int k = 0; k < n; ++k) {
                double sk = im.sigma.derivative(x, k);
                dg[k] = s2 * (base[k] + 2.0 * sk * gb);
            }
            return dg;
        }
    }
    throw Error("corrupt model");
}

Vector lattice_coord(const Box& box, const std::vector<int>& idx, int pts) {
    Vector x(box.dim());
    for (int d = 0; d < box.dim(); ++d) {
        double t = (pts == 1) ? 0.5 : static_cast<double>(idx[d]) / (pts - 1);
        x[d] = box.lo[d] + t * (box.hi[d] - box.lo[d]);
    }
    return x;
}

std::vector<Vector> direction_fan(int n) {
    std::vector<Vector> dirs;
    if (n == 2) {
        for (int k = 0; k < 16; ++k) {
            double a = 2.0 * M_PI * k / 16.0;
            Vector y(2);
            y << std::cos(a), std::sin(a);
            dirs.push_back(y);
        }
    } else {
        for (int t = 1; t <= 3; ++t) {
            double theta = M_PI * t / 4.0;
            for (int k = 0; k < 8; ++k) {
                double psi = 2.0 * M_PI * k / 8.0;
                Vector y(3);
                y << std::sin(theta) * std::cos(psi), std::sin(theta) * std::sin(psi), std::cos(theta);
                dirs.push_back(y);
            }
        }
        Vector up(3), dn(3);
        up << 0, 0, 1;
        dn << 0, 0, -1;
        dirs.push_back(up);
        dirs.push_back(dn);
    }
    return dirs;
}

}  // namespace

FinslerModel FinslerModel::riemannian(std::vector<std::vector<ScalarField>> a, Box domain) {
    const int n = static_cast<int>(a.size());
    if (n < 2) throw ConfigError("model dimension must be at least 2");
    if (domain.dim() != n || domain.hi.size() != n) throw ConfigError("domain dimension mismatch");
    for (int d = 0; d < n; ++d)
        if (!(domain.lo[d] < domain.hi[d])) throw ConfigError("domain box is empty");
    auto im = std::make_shared<Impl>();
    im->family = Family::riemannian;
    im->n = n;
    im->box = std::move(domain);
    im->a.resize(n * (n + 1) / 2);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(a[i].size()) != n) throw ConfigError("coefficient matrix a is not square");
        for (int j = i; j < n; ++j) {
            if (a[i][j].empty()) throw ConfigError("coefficient a[" + std::to_string(i) + "][" + std::to_string(j) + "] is empty");
            if (!same_structure(a[i][j], a[j][i]))
                throw ConfigError("coefficient matrix a must be symmetric (a[" + std::to_string(i) +
                                  "][" + std::to_string(j) + "] differs from its mirror)");
            if (a[i][j].num_vars() > n)
                throw ConfigError("coefficient a[" + std::to_string(i) + "][" + std::to_string(j) +
                                  "] references x" + std::to_string(a[i][j].num_vars()) +
                                  " but dimension is " + std::to_string(n));
            im->a[Impl::tri(n, i, j)] = a[i][j];
        }
    }
    return FinslerModel(std::move(im));
}

FinslerModel FinslerModel::randers(std::vector<std::vector<ScalarField>> a,
                                   std::vector<ScalarField> b, Box domain) {
    FinslerModel base = riemannian(std::move(a), std::move(domain));
    auto im = std::make_shared<Impl>(*base.impl_);
    im->family = Family::randers;
    const int n = im->n;
    if (static_cast<int>(b.size()) != n) throw ConfigError("one-form b must have one entry per dimension");
    for (int i = 0; i < n; ++i) {
        if (b[i].empty()) throw ConfigError("one-form b[" + std::to_string(i) + "] is empty");
        if (b[i].num_vars() > n)
            throw ConfigError("one-form b[" + std::to_string(i) + "] references x" +
                              std::to_string(b[i].num_vars()) + " but dimension is " + std::to_string(n));
    }
    im->b = std::move(b);
    return FinslerModel(std::move(im));
}

FinslerModel conformal_scale(const FinslerModel& m, ScalarField sigma) {
    if (sigma.empty()) throw ConfigError("conformal factor sigma is empty");
    if (sigma.num_vars() > m.dimension())
        throw ConfigError("sigma references x" + std::to_string(sigma.num_vars()) +
                          " but model dimension is " + std::to_string(m.dimension()));
    auto im = std::make_shared<FinslerModel::Impl>();
    im->family = Family::conformal_scaled;
    im->n = m.dimension();
    im->box = m.domain();
    im->sigma = std::move(sigma);
    im->base = m.impl_ptr();
    return FinslerModel(std::move(im));
}

double eval_F(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_dims(m, x, y);
    check_in_domain(m, x);
    check_direction(y);
    return m.value<double>(x, y);
}

Matrix fundamental_tensor(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_dims(m, x, y);
    check_direction(y);
    Matrix g = fundamental_impl(m.impl(), x, y);
    Eigen::LLT<Matrix> llt(g);
    if (llt.info() != Eigen::Success)
        throw ModelError("fundamental tensor not positive definite at x = " + point_str(x) +
                         ", y = " + point_str(y));
    return g;
}

Matrix inverse_fundamental(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_dims(m, x, y);
    check_direction(y);
    return inverse_impl(m.impl(), x, y);
}

double angle_cos(const FinslerModel& m, const Vector& x, const Vector& u, const Vector& v) {
    check_dims(m, x, u);
    check_dims(m, x, v);
    check_direction(u);
    check_direction(v);
    Matrix g = fundamental_tensor(m, x, u);
    double num = u.dot(g * v);
    double den = std::sqrt(u.dot(g * u)) * std::sqrt(v.dot(g * v));
    double c = num / den;
    return std::min(1.0, std::max(-1.0, c));
}

Tensor3 cartan_tensor(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_dims(m, x, y);
    check_direction(y);
    return cartan_impl(m.impl(), x, y);
}

PointTensors point_tensors(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_dims(m, x, y);
    check_direction(y);
    PointTensors pt;
    pt.g = fundamental_impl(m.impl(), x, y);
    pt.g_inv = spd_inverse(pt.g, x, y);
    pt.F = m.value<double>(x, y);
    pt.l_up = y / pt.F;
    pt.l_cov = pt.g * pt.l_up;
    pt.dg_dx = dgdx_impl(m.impl(), x, y);
    pt.cartan = cartan_impl(m.impl(), x, y);
    return pt;
}

Tensor3 christoffel_of(const PointTensors& pt) {
    const int n = static_cast<int>(pt.g.rows());
    Tensor3 gamma(n, Tensor3::Symmetry::pair_jk);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                double s = 0.0;
                for (int r = 0; r < n; ++r)
                    s += pt.g_inv(i, r) * (pt.dg_dx[k](r, j) - pt.dg_dx[r](j, k) + pt.dg_dx[j](k, r));
                gamma(i, j, k) = gamma(i, k, j) = 0.5 * s;
            }
    return gamma;
}

Matrix connection_of(const PointTensors& pt, const Tensor3& gamma) {
    const int n = static_cast<int>(pt.g.rows());
    Vector q(n);
    for (int k = 0; k < n; ++k) {
        double s = 0.0;
        for (int r = 0; r < n; ++r)
            for (int t = 0; t < n; ++t) s += gamma(k, r, t) * pt.l_up[r] * pt.l_up[t];
        q[k] = s;
    }
    Matrix nn(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double t1 = 0.0;
            for (int k = 0; k < n; ++k) t1 += gamma(i, j, k) * pt.l_up[k];
            double t2 = 0.0;
            for (int k = 0; k < n; ++k) {
                double cup = 0.0;
                for (int s = 0; s < n; ++s) cup += pt.g_inv(i, s) * pt.cartan(s, j, k);
                t2 += cup * q[k];
            }
            // the Cartan term carries the scale-invariant F C^i_jk
            nn(i, j) = t1 - pt.F * t2;
        }
    return nn;
}

Tensor3 formal_christoffel(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_interior(m, x);
    return christoffel_of(point_tensors(m, x, y));
}

Matrix nonlinear_connection(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_interior(m, x);
    PointTensors pt = point_tensors(m, x, y);
    return connection_of(pt, christoffel_of(pt));
}

ValidationReport validate_model(const FinslerModel& m) { return validate_model(m, m.domain()); }

ValidationReport validate_model(const FinslerModel& m, const Box& region) {
    const int n = m.dimension();
    const int pts = 5;
    ValidationReport rep;

    const FinslerModel::Impl* inner = &m.impl();
    while (inner->family == Family::conformal_scaled) inner = inner->base.get();
    rep.has_randers_margin = inner->family == Family::randers;

    std::vector<Vector> dirs = direction_fan(n);
    std::vector<int> idx(n, 0);
    Eigen::SelfAdjointEigenSolver<Matrix> eig;
    while (true) {
        Vector x = lattice_coord(region, idx, pts);
        if (rep.has_randers_margin) {
            Matrix a(n, n);
            bool ok = true;
            try {
                for (int i = 0; i < n; ++i)
                    for (int j = i; j < n; ++j) a(i, j) = a(j, i) = inner->a_field(i, j)(x);
            } catch (const DomainError& e) {
                rep.valid = false;
                rep.message = std::string("coefficient evaluation failed at x = ") + point_str(x) + ": " + e.what();
                return rep;
            }
            Eigen::LLT<Matrix> llt(a);
            if (llt.info() != Eigen::Success) {
                rep.valid = false;
                rep.message = "randers base metric a not positive definite at x = " + point_str(x);
                return rep;
            }
            Vector b(n);
            try {
                for (int i = 0; i < n; ++i) b[i] = inner->b[i](x);
            } catch (const DomainError& e) {
                rep.valid = false;
                rep.message = std::string("one-form evaluation failed at x = ") + point_str(x) + ": " + e.what();
                return rep;
            }
            double bnorm = std::sqrt(b.dot(llt.solve(b)));
            rep.min_randers_margin = std::min(rep.min_randers_margin, 1.0 - bnorm);
            if (bnorm > 1.0 - kRandersMargin) {
                rep.valid = false;
                std::ostringstream os;
                os << "randers one-form norm ||b||_a = " << bnorm << " >= 1 - " << kRandersMargin
                   << " at x = " << point_str(x);
                rep.message = os.str();
                return rep;
            }
        }
        for (const Vector& y : dirs) {
            ++rep.samples;
            try {
                Matrix g = fundamental_impl(m.impl(), x, y);
                eig.compute(g, Eigen::EigenvaluesOnly);
                double mn = eig.eigenvalues().minCoeff();
                rep.min_metric_eigenvalue = std::min(rep.min_metric_eigenvalue, mn);
                if (mn <= 0.0) {
                    rep.valid = false;
                    rep.message = "fundamental tensor not positive definite at x = " + point_str(x) +
                                  ", y = " + point_str(y);
                    return rep;
                }
            } catch (const Error& e) {
                rep.valid = false;
                rep.message = std::string("evaluation failed at x = ") + point_str(x) + ", y = " +
                              point_str(y) + ": " + e.what();
                return rep;
            }
        }
        int d = n - 1;
        while (d >= 0 && ++idx[d] == pts) idx[d--] = 0;
        if (d < 0) break;
    }
    std::ostringstream os;
    os << "valid (" << rep.samples << " samples, min metric eigenvalue " << rep.min_metric_eigenvalue;
    if (rep.has_randers_margin) os << ", min randers margin " << rep.min_randers_margin;
    os << ")";
    rep.message = os.str();
    return rep;
}

}  // namespace finsler
