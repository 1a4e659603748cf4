#pragma once

#include <functional>
#include <vector>

#include "finsler/model.hpp"

namespace finsler {

// One quadrature node on the indicatrix S_xM: fiber parameter phi on the
// Euclidean unit sphere, the indicatrix representative y with F(x,y) = 1,
// a quadrature weight and the coordinate density of the sphere-bundle
// volume element at (x, phi).
struct FiberNode {
    Vector phi;
    Vector y;
    double weight = 0.0;
    double density = 0.0;
};

// Frame data of the adapted splitting at (x, y).
struct AdaptedFrame {
    double F = 0.0;
    Vector l_up, l_cov;
    Matrix g, g_inv;
    Matrix h;   // angular metric g - l l^T
    Matrix nn;  // N^i_j / F
};

// Derivative callbacks of a scalar on the sphere bundle, given in natural
// coordinates (x, y).
struct SphereFunction {
    std::function<Vector(const Vector&, const Vector&)> dx;
    std::function<Vector(const Vector&, const Vector&)> dy;
};

// Euclidean unit-sphere chart: n=2 uses one angle, n=3 the polar pair
// (theta, psi).
Vector sphere_direction(const Vector& phi, int n);
Matrix sphere_direction_jacobian(const Vector& phi, int n);  // n x (n-1)
Vector sphere_angles(const Vector& y);

Vector hilbert_form(const FinslerModel& m, const Vector& x, const Vector& y);  // l_i
Matrix angular_metric(const FinslerModel& m, const Vector& x, const Vector& y);
Matrix d_omega_frame(const FinslerModel& m, const Vector& x, const Vector& y);  // -h
AdaptedFrame adapted_frame(const FinslerModel& m, const Vector& x, const Vector& y);

// Density D of the volume element in coordinates (x, phi), obtained by
// pulling the Hilbert form and its exterior derivative back along the
// indicatrix embedding and wedging to top degree. D > 0 under the fixed
// orientation (dx^1..dx^n, dphi^1..dphi^{n-1}).
double volume_density(const FinslerModel& m, const Vector& x, const Vector& phi);

// Nodes covering S_xM: trapezoid in periodic angles, Gauss-Legendre in
// the polar angle for n=3. sum w_k D_k approximates the fiber measure.
std::vector<FiberNode> fiber_quadrature(const FinslerModel& m, const Vector& x, int order);

// |grad u^V| for a vertical lift with spatial differential du.
double vertical_lift_grad_norm(const FinslerModel& m, const Vector& x, const Vector& y,
                               const Vector& du);

// Sasaki-metric gradient norm of a scalar on SM from its coordinate
// derivatives.
double gradient_norm_sm(const FinslerModel& m, const SphereFunction& f, const Vector& x,
                        const Vector& y);

namespace detail {
// embedding point + density + pointwise tensors in one pass (the energy
// assembly wants g_inv at the same node the density is computed at)
struct IndicatrixPoint {
    Vector y;
    double density = 0.0;
    PointTensors pt;
};
IndicatrixPoint indicatrix_point(const FinslerModel& m, const Vector& x, const Vector& phi);
void gauss_legendre(int k, std::vector<double>& nodes, std::vector<double>& weights);
void fiber_parameters(int n, int order, std::vector<Vector>& phis, std::vector<double>& weights);
}  // namespace detail

}  // namespace finsler
