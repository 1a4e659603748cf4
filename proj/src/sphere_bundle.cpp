#include "finsler/sphere_bundle.hpp"

#include <cmath>
#include <sstream>

#include "finsler/forms.hpp"

namespace finsler {

namespace {

void check_pair(const FinslerModel& m, const Vector& x, const Vector& y) {
    if (x.size() != m.dimension() || y.size() != m.dimension())
        throw ModelError("point/direction dimension does not match model dimension");
    if (y.lpNorm<Eigen::Infinity>() < 1e-8) throw ModelError("direction too close to zero");
}

void check_interior(const FinslerModel& m, const Vector& x) {
    double margin = 1e-6 * std::max(1.0, x.lpNorm<Eigen::Infinity>());
    if (m.domain().boundary_distance(x) < margin)
        throw ModelError("point not interior to chart domain");
}

}  // namespace

Vector sphere_direction(const Vector& phi, int n) {
    Vector y(n);
    if (n == 2) {
        y << std::cos(phi[0]), std::sin(phi[0]);
    } else {
        double st = std::sin(phi[0]), ct = std::cos(phi[0]);
        double sp = std::sin(phi[1]), cp = std::cos(phi[1]);
        y << st * cp, st * sp, ct;
    }
    return y;
}

Matrix sphere_direction_jacobian(const Vector& phi, int n) {
    Matrix J(n, n - 1);
    if (n == 2) {
        J(0, 0) = -std::sin(phi[0]);
        J(1, 0) = std::cos(phi[0]);
    } else {
        double st = std::sin(phi[0]), ct = std::cos(phi[0]);
        double sp = std::sin(phi[1]), cp = std::cos(phi[1]);
        J(0, 0) = ct * cp;
        J(1, 0) = ct * sp;
        J(2, 0) = -st;
        J(0, 1) = -st * sp;
        J(1, 1) = st * cp;
        J(2, 1) = 0.0;
    }
    return J;
}

Vector sphere_angles(const Vector& y) {
    const int n = static_cast<int>(y.size());
    Vector phi(n - 1);
    if (n == 2) {
        phi[0] = std::atan2(y[1], y[0]);
    } else {
        double r = y.norm();
        phi[0] = std::acos(std::min(1.0, std::max(-1.0, y[2] / r)));
        phi[1] = std::atan2(y[1], y[0]);
    }
    return phi;
}

Vector hilbert_form(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_pair(m, x, y);
    Matrix g = fundamental_tensor(m, x, y);
    double F = m.value<double>(x, y);
    return g * (y / F);
}

Matrix angular_metric(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_pair(m, x, y);
    Matrix g = fundamental_tensor(m, x, y);
    double F = m.value<double>(x, y);
    Vector l = g * (y / F);
    return g - l * l.transpose();
}

Matrix d_omega_frame(const FinslerModel& m, const Vector& x, const Vector& y) {
    return -angular_metric(m, x, y);
}

AdaptedFrame adapted_frame(const FinslerModel& m, const Vector& x, const Vector& y) {
    check_pair(m, x, y);
    PointTensors pt = point_tensors(m, x, y);
    AdaptedFrame fr;
    fr.F = pt.F;
    fr.l_up = pt.l_up;
    fr.l_cov = pt.l_cov;
    fr.g = pt.g;
    fr.g_inv = pt.g_inv;
    fr.h = pt.g - pt.l_cov * pt.l_cov.transpose();
    fr.nn = connection_of(pt, christoffel_of(pt));
    return fr;
}

namespace detail {

IndicatrixPoint indicatrix_point(const FinslerModel& m, const Vector& x, const Vector& phi) {
    const int n = m.dimension();
    if (phi.size() != n - 1) throw ModelError("fiber parameter has wrong dimension");
    const int mdim = 2 * n - 1;

    Vector yhat = sphere_direction(phi, n);
    double Fh = m.value<double>(x, yhat);
    Vector y = yhat / Fh;

    IndicatrixPoint out;
    out.pt = point_tensors(m, x, y);
    const PointTensors& pt = out.pt;
    Matrix nn = connection_of(pt, christoffel_of(pt));
    Matrix N = pt.F * nn;

    // dF/dx at (x, yhat); zero-homogeneous, so it matches the value at y
    Vector dF_dx(n);
    {
        VectorT<Dual1> xd(n), yd(n);
        for (int j = 0; j < n; ++j) yd[j] = Dual1(yhat[j], 0.0);
        for (int k = 0; k < n; ++k) {
            for (int j = 0; j < n; ++j) xd[j] = Dual1(x[j], j == k ? 1.0 : 0.0);
            dF_dx[k] = m.value(xd, yd).d;
        }
    }

    // embedding y(x, phi) = yhat(phi) / F(x, yhat)
    Matrix dy_dx(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) dy_dx(j, k) = -y[j] * dF_dx[k] / Fh;

    Matrix J = sphere_direction_jacobian(phi, n);
    Matrix dy_dphi(n, n - 1);
    for (int a = 0; a < n - 1; ++a) {
        double lJ = 0.0;
        for (int mm = 0; mm < n; ++mm) lJ += pt.l_cov[mm] * J(mm, a);
        for (int j = 0; j < n; ++j) dy_dphi(j, a) = (J(j, a) - yhat[j] * lJ / Fh) / Fh;
    }

    Matrix h = pt.g - pt.l_cov * pt.l_cov.transpose();

    Form omega(mdim, 1);
    for (int i = 0; i < n; ++i) omega[1u << i] = pt.l_cov[i];

    Form dom(mdim, 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double hij = h(i, j);
            if (hij == 0.0) continue;
            for (int k = 0; k < n; ++k) dom.add_pair(i, k, -hij * (dy_dx(j, k) + N(j, k)));
            for (int a = 0; a < n - 1; ++a)
                dom[(1u << i) | (1u << (n + a))] += -hij * dy_dphi(j, a);
        }

    Form acc = omega;
    for (int r = 1; r < n; ++r) acc = wedge(acc, dom);
    double raw = acc[(1u << mdim) - 1];

    double sign = ((n * (n - 1) / 2) % 2) ? -1.0 : 1.0;
    double fact = 1.0;
    for (int i = 2; i <= n - 1; ++i) fact *= i;
    double D = sign * raw / fact;
    if (!(D > 0.0) || !std::isfinite(D)) {
        std::ostringstream os;
        os << "non-positive sphere-bundle volume density D = " << D;
        throw NumericalError(os.str());
    }
    out.y = std::move(y);
    out.density = D;
    return out;
}

void gauss_legendre(int k, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(k, 0.0);
    weights.assign(k, 0.0);
    for (int i = 0; i < k; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (k + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= k; ++j) {
                double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = k * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

void fiber_parameters(int n, int order, std::vector<Vector>& phis, std::vector<double>& weights) {
    phis.clear();
    weights.clear();
    if (n == 2) {
        for (int k = 0; k < order; ++k) {
            Vector phi(1);
            phi[0] = 2.0 * M_PI * k / order;
            phis.push_back(phi);
            weights.push_back(2.0 * M_PI / order);
        }
        return;
    }
    const int ntheta = std::max(2, order / 2);
    std::vector<double> gn, gw;
    gauss_legendre(ntheta, gn, gw);
    for (int t = 0; t < ntheta; ++t) {
        double theta = 0.5 * M_PI * (gn[t] + 1.0);
        double wt = 0.5 * M_PI * gw[t];
        for (int k = 0; k < order; ++k) {
            Vector phi(2);
            phi << theta, 2.0 * M_PI * k / order;
            phis.push_back(phi);
            weights.push_back(wt * 2.0 * M_PI / order);
        }
    }
}

}  // namespace detail

double volume_density(const FinslerModel& m, const Vector& x, const Vector& phi) {
    check_interior(m, x);
    return detail::indicatrix_point(m, x, phi).density;
}

std::vector<FiberNode> fiber_quadrature(const FinslerModel& m, const Vector& x, int order) {
    if (order < 4) throw ModelError("fiber quadrature order must be at least 4");
    check_interior(m, x);
    std::vector<Vector> phis;
    std::vector<double> ws;
    detail::fiber_parameters(m.dimension(), order, phis, ws);
    std::vector<FiberNode> nodes;
    nodes.reserve(phis.size());
    for (std::size_t k = 0; k < phis.size(); ++k) {
        detail::IndicatrixPoint ip = detail::indicatrix_point(m, x, phis[k]);
        nodes.push_back({phis[k], ip.y, ws[k], ip.density});
    }
    return nodes;
}

double vertical_lift_grad_norm(const FinslerModel& m, const Vector& x, const Vector& y,
                               const Vector& du) {
    check_pair(m, x, y);
    Matrix ginv = inverse_fundamental(m, x, y);
    return std::sqrt(du.dot(ginv * du));
}

double gradient_norm_sm(const FinslerModel& m, const SphereFunction& f, const Vector& x,
                        const Vector& y) {
    check_pair(m, x, y);
    PointTensors pt = point_tensors(m, x, y);
    Matrix nn = connection_of(pt, christoffel_of(pt));
    Vector fx = f.dx(x, y);
    Vector fy = f.dy(x, y);
    const int n = m.dimension();
    Vector delta(n);
    for (int i = 0; i < n; ++i) {
        double s = fx[i];
        for (int j = 0; j < n; ++j) s -= pt.F * nn(j, i) * fy[j];
        delta[i] = s;
    }
    double hor = delta.dot(pt.g_inv * delta);
    double ver = pt.F * pt.F * fy.dot(pt.g_inv * fy);
    return std::sqrt(hor + ver);
}

}  // namespace finsler
