#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "finsler/model.hpp"
#include "oracles.hpp"
#include "test_models.hpp"

using namespace finsler;
using namespace finsler::test;

namespace {

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

// dF/dx_k through a first-order dual
double dF_dx(const FinslerModel& m, const Vector& x, const Vector& y, int k) {
    const int n = m.dimension();
    VectorT<Dual1> xd(n), yd(n);
    for (int j = 0; j < n; ++j) {
        xd[j] = Dual1(x[j], j == k ? 1.0 : 0.0);
        yd[j] = Dual1(y[j], 0.0);
    }
    return m.value(xd, yd).d;
}

double dF_dy(const FinslerModel& m, const Vector& x, const Vector& y, int k) {
    const int n = m.dimension();
    VectorT<Dual1> xd(n), yd(n);
    for (int j = 0; j < n; ++j) {
        xd[j] = Dual1(x[j], 0.0);
        yd[j] = Dual1(y[j], j == k ? 1.0 : 0.0);
    }
    return m.value(xd, yd).d;
}

}  // namespace

TEST_CASE("eval_F on the built-in families") {
    FinslerModel eu = euclidean2();
    CHECK(eval_F(eu, vec2(0.3, -0.2), vec2(3.0, 4.0)) == doctest::Approx(5.0).epsilon(1e-14));

    FinslerModel rd = randers_const2(0.5);
    CHECK(eval_F(rd, vec2(0.0, 0.0), vec2(1.0, 0.0)) == doctest::Approx(1.5).epsilon(1e-14));

    CHECK_THROWS_AS(eval_F(eu, vec2(0, 0), vec2(0, 0)), ModelError);
    CHECK_THROWS_AS(eval_F(eu, vec2(10, 0), vec2(1, 0)), ModelError);
}

TEST_CASE("positive 1-homogeneity of F") {
    Sampler s(11u);
    for (const FinslerModel& m :
         {euclidean2(), riemann_curved2(), randers_var2(), conformal_scale(randers_var2(), sigma_wavy())}) {
        for (int k = 0; k < 200; ++k) {
            Vector x = s.point_in(m.domain());
            Vector y = s.direction(2);
            double f = eval_F(m, x, y);
            CHECK(f > 0.0);
            CHECK(rel_err(eval_F(m, x, 2.0 * y), 2.0 * f) <= 1e-12);
        }
    }
}

TEST_CASE("fundamental tensor: identity for Euclidean, 0-homogeneous, FD Hessian oracle") {
    Sampler s(12u);
    FinslerModel eu = euclidean2();
    for (int k = 0; k < 50; ++k) {
        Vector x = s.point_in(eu.domain());
        Vector y = s.direction(2);
        Matrix g = fundamental_tensor(eu, x, y);
        CHECK((g - Matrix::Identity(2, 2)).lpNorm<Eigen::Infinity>() <= 1e-14);
    }

    for (const FinslerModel& m : {riemann_curved2(), randers_var2(), randers_const2(0.5)}) {
        for (int k = 0; k < 100; ++k) {
            Vector x = s.point_in(m.domain());
            Vector y = s.direction(m.dimension());
            Matrix g = fundamental_tensor(m, x, y);
            Matrix g3 = fundamental_tensor(m, x, 3.0 * y);
            CHECK((g - g3).lpNorm<Eigen::Infinity>() <= 1e-12 * g.lpNorm<Eigen::Infinity>() + 1e-12);

            // independent oracle: FD Hessian of F^2/2 in y
            for (int i = 0; i < m.dimension(); ++i)
                for (int j = i; j < m.dimension(); ++j) {
                    double fd = fd2(
                        [&](const Vector& yy) {
                            double f = m.value<double>(x, yy);
                            return 0.5 * f * f;
                        },
                        y, i, j);
                    CHECK(rel_err(g(i, j), fd) <= 1e-6);
                }
        }
    }

    // spec example: Randers a = I, b = (0.5, 0), y = (0, 1)
    FinslerModel rd = randers_const2(0.5);
    Vector x = vec2(0.7, -0.4), y = vec2(0.0, 1.0);
    Matrix g = fundamental_tensor(rd, x, y);
    for (int i = 0; i < 2; ++i)
        for (int j = i; j < 2; ++j) {
            double fd = fd2(
                [&](const Vector& yy) {
                    double f = rd.value<double>(x, yy);
                    return 0.5 * f * f;
                },
                y, i, j);
            CHECK(rel_err(g(i, j), fd) <= 1e-6);
        }
}

TEST_CASE("Euler identities at random samples") {
    Sampler s(13u);
    for (const FinslerModel& m : {euclidean2(), riemann_curved2(), randers_var2(), randers3(),
                                  conformal_scale(riemann_curved2(), sigma_wavy())}) {
        for (int k = 0; k < 200; ++k) {
            Vector x = s.point_in(m.domain());
            Vector y = s.direction(m.dimension());
            double F = eval_F(m, x, y);
            Matrix g = fundamental_tensor(m, x, y);
            CHECK(rel_err(y.dot(g * y), F * F) <= 1e-10);
            double fyy = 0.0;
            for (int i = 0; i < m.dimension(); ++i) fyy += dF_dy(m, x, y, i) * y[i];
            CHECK(rel_err(fyy, F) <= 1e-10);
        }
    }
}

TEST_CASE("inverse fundamental tensor") {
    Sampler s(14u);
    FinslerModel eu = euclidean2();
    Vector x0 = vec2(0.1, 0.2), y0 = vec2(1.0, 2.0);
    CHECK((inverse_fundamental(eu, x0, y0) - Matrix::Identity(2, 2)).lpNorm<Eigen::Infinity>() <=
          1e-14);

    for (const FinslerModel& m : {riemann_curved2(), randers_var2()}) {
        for (int k = 0; k < 100; ++k) {
            Vector x = s.point_in(m.domain());
            Vector y = s.direction(2);
            Matrix g = fundamental_tensor(m, x, y);
            Matrix gi = inverse_fundamental(m, x, y);
            CHECK(((g * gi) - Matrix::Identity(2, 2)).lpNorm<Eigen::Infinity>() <= 1e-10);
        }
    }

    // conformal scaling by a constant: g'^{ij} = e^{-2 sigma} g^{ij}
    FinslerModel rd = randers_const2(0.5);
    FinslerModel scaled = conformal_scale(rd, sf("log(2)"));
    for (int k = 0; k < 50; ++k) {
        Vector x = s.point_in(rd.domain());
        Vector y = s.direction(2);
        Matrix gi = inverse_fundamental(rd, x, y);
        Matrix gs = inverse_fundamental(scaled, x, y);
        CHECK((gs - 0.25 * gi).lpNorm<Eigen::Infinity>() <= 1e-12 * gi.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("angle: normalization, orthogonality, conformal invariance") {
    Sampler s(15u);
    FinslerModel eu = euclidean2();
    CHECK(angle_cos(eu, vec2(0, 0), vec2(1, 0), vec2(0, 1)) == doctest::Approx(0.0).epsilon(1e-15));

    for (const FinslerModel& m : {riemann_curved2(), randers_var2()}) {
        FinslerModel scaled = conformal_scale(m, sigma_wavy());
        for (int k = 0; k < 300; ++k) {
            Vector x = s.point_in(m.domain());
            Vector u = s.direction(2);
            Vector v = s.direction(2);
            double c = angle_cos(m, x, u, v);
            CHECK(angle_cos(m, x, u, u) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(c >= -1.0);
            CHECK(c <= 1.0);
            CHECK(std::abs(angle_cos(scaled, x, u, v) - c) <= 1e-12);
        }
    }
}

TEST_CASE("Cartan tensor") {
    Sampler s(16u);
    FinslerModel curved = riemann_curved2();
    for (int k = 0; k < 20; ++k) {
        Tensor3 c = cartan_tensor(curved, s.point_in(curved.domain()), s.direction(2));
        CHECK(c.max_abs() == 0.0);  // Riemannian: g has no y-dependence
    }

    for (const FinslerModel& m : {randers_const2(0.5), randers_var2(), randers3()}) {
        for (int k = 0; k < 100; ++k) {
            Vector x = s.point_in(m.domain());
            Vector y = s.direction(m.dimension());
            Tensor3 c = cartan_tensor(m, x, y);
            CHECK(c.max_symmetry_violation() <= 1e-12 * std::max(1.0, c.max_abs()));
            // Euler: the contraction with y vanishes (g is 0-homogeneous)
            double scale = std::max(1.0, c.max_abs() * y.lpNorm<Eigen::Infinity>());
            for (int i = 0; i < m.dimension(); ++i)
                for (int j = 0; j < m.dimension(); ++j) {
                    double contr = 0.0;
                    for (int kk = 0; kk < m.dimension(); ++kk) contr += c(i, j, kk) * y[kk];
                    CHECK(std::abs(contr) / scale <= 1e-10);
                }
        }
    }
}

TEST_CASE("formal Christoffel symbols against the closed-form diagonal metric") {
    FinslerModel eu = euclidean2();
    Tensor3 ge = formal_christoffel(eu, vec2(0.4, 0.3), vec2(1.0, 0.5));
    CHECK(ge.max_abs() == 0.0);

    // oracle: Levi-Civita symbols of a = diag(a1, a2) with a1 = 1, a2 = x1^2:
    //   gamma^1_22 = -d1(a2) / (2 a1) = -x1
    //   gamma^2_12 = d1(a2) / (2 a2) = 1 / x1
    // and all symbols not related to these by j<->k symmetry vanish.
    FinslerModel dm = diag_metric2();
    Sampler s(17u);
    for (int k = 0; k < 50; ++k) {
        Vector x = s.point_in(dm.domain());
        Vector y = s.direction(2);
        Tensor3 g = formal_christoffel(dm, x, y);
        Tensor3 want(2, Tensor3::Symmetry::pair_jk);
        want(0, 1, 1) = -x[0];
        want(1, 0, 1) = want(1, 1, 0) = 1.0 / x[0];
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int kk = 0; kk < 2; ++kk)
                    CHECK(rel_err(g(i, j, kk), want(i, j, kk)) <= 1e-12);
        CHECK(g.max_symmetry_violation() == 0.0);
    }

    // lower-index symmetry for a y-dependent family
    FinslerModel rv = randers_var2();
    for (int k = 0; k < 30; ++k) {
        Tensor3 g = formal_christoffel(rv, s.point_in(rv.domain()), s.direction(2));
        CHECK(g.max_symmetry_violation() == 0.0);
    }
}

TEST_CASE("x-derivatives of g match the finite-difference oracle") {
    Sampler s(18u);
    for (const FinslerModel& m : {riemann_curved2(), randers_var2()}) {
        for (int k = 0; k < 40; ++k) {
            Vector x = s.point_in(m.domain());
            Vector y = s.direction(2);
            PointTensors pt = point_tensors(m, x, y);
            for (int d = 0; d < 2; ++d)
                for (int i = 0; i < 2; ++i)
                    for (int j = i; j < 2; ++j) {
                        double fd = fd1(
                            [&](const Vector& xx) { return fundamental_tensor(m, xx, y)(i, j); },
                            x, d);
                        CHECK(rel_err(pt.dg_dx[d](i, j), fd) <= 1e-6);
                    }
        }
    }
}

TEST_CASE("nonlinear connection") {
    Sampler s(19u);

    // x-independent structures have a vanishing connection
    FinslerModel eu = euclidean2();
    FinslerModel rc = randers_const2(0.5);
    for (int k = 0; k < 20; ++k) {
        Vector x = s.point_in(eu.domain());
        Vector y = s.direction(2);
        CHECK(nonlinear_connection(eu, x, y).lpNorm<Eigen::Infinity>() == 0.0);
        CHECK(nonlinear_connection(rc, x, y).lpNorm<Eigen::Infinity>() == 0.0);
    }

    // Riemannian case: the Cartan term drops, leaving gamma^i_jk l^k
    FinslerModel curved = riemann_curved2();
    for (int k = 0; k < 40; ++k) {
        Vector x = s.point_in(curved.domain());
        Vector y = s.direction(2);
        Matrix nn = nonlinear_connection(curved, x, y);
        Tensor3 gamma = formal_christoffel(curved, x, y);
        double F = eval_F(curved, x, y);
        Matrix want(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                double t = 0.0;
                for (int kk = 0; kk < 2; ++kk) t += gamma(i, j, kk) * y[kk] / F;
                want(i, j) = t;
            }
        CHECK((nn - want).lpNorm<Eigen::Infinity>() <= 1e-12 * std::max(1.0, want.lpNorm<Eigen::Infinity>()));
    }

    // invariance under positive rescaling of y
    for (const FinslerModel& m : {curved, randers_var2(), randers3()}) {
        for (int k = 0; k < 60; ++k) {
            Vector x = s.point_in(m.domain());
            Vector y = s.direction(m.dimension());
            Matrix a = nonlinear_connection(m, x, y);
            Matrix b = nonlinear_connection(m, x, 7.0 * y);
            CHECK((a - b).lpNorm<Eigen::Infinity>() <=
                  1e-10 * std::max(1.0, a.lpNorm<Eigen::Infinity>()));
        }
    }
}

TEST_CASE("horizontal constancy of F validates gamma, C and N jointly") {
    Sampler s(20u);
    for (const FinslerModel& m : {riemann_curved2(), randers_var2(),
                                  conformal_scale(randers_var2(), sigma_wavy())}) {
        for (int k = 0; k < 60; ++k) {
            Vector x = s.point_in(m.domain());
            Vector y = s.direction(m.dimension());
            Matrix nn = nonlinear_connection(m, x, y);
            double F = eval_F(m, x, y);
            double scale = 1.0;
            for (int i = 0; i < m.dimension(); ++i)
                scale = std::max(scale, std::abs(dF_dx(m, x, y, i)));
            for (int i = 0; i < m.dimension(); ++i) {
                double delta = dF_dx(m, x, y, i);
                for (int j = 0; j < m.dimension(); ++j)
                    delta -= nn(j, i) * F * dF_dy(m, x, y, j);
                CHECK(std::abs(delta) / scale <= 1e-8);
            }
        }
    }
}

TEST_CASE("conformal scaling is exact by construction") {
    Sampler s(21u);
    FinslerModel rd = randers_var2();

    FinslerModel id = conformal_scale(rd, sf("0"));
    FinslerModel two = conformal_scale(rd, sf("log(2)"));
    FinslerModel wavy = conformal_scale(rd, sigma_wavy());

    for (int k = 0; k < 100; ++k) {
        Vector x = s.point_in(rd.domain());
        Vector y = s.direction(2);
        double F = eval_F(rd, x, y);
        CHECK(eval_F(id, x, y) == F);
        CHECK(rel_err(eval_F(two, x, y), 2.0 * F) <= 1e-15);

        Matrix g = fundamental_tensor(rd, x, y);
        Matrix g2 = fundamental_tensor(two, x, y);
        CHECK((g2 - 4.0 * g).lpNorm<Eigen::Infinity>() <= 1e-14 * g.lpNorm<Eigen::Infinity>());

        double s2 = std::exp(2.0 * sigma_wavy()(x));
        Matrix gw = fundamental_tensor(wavy, x, y);
        CHECK((gw - s2 * g).lpNorm<Eigen::Infinity>() <= 1e-12 * g.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("model validation") {
    CHECK(validate_model(randers_const2(0.5)).valid);

    FinslerModel bad = randers_const2(1.5);
    ValidationReport rep = validate_model(bad);
    CHECK_FALSE(rep.valid);
    CHECK(rep.message.find("one-form") != std::string::npos);

    // not positive definite where x1 <= 0
    FinslerModel indef = FinslerModel::riemannian({{sf("1"), sf("0")}, {sf("0"), sf("x1")}},
                                                  square_domain(2.0));
    CHECK_FALSE(validate_model(indef).valid);

    CHECK(validate_model(riemann_curved2()).valid);
    CHECK(validate_model(conformal_scale(randers_const2(0.5), sigma_wavy())).valid);

    CHECK_THROWS_AS(fundamental_tensor(indef, vec2(-1.0, 0.0), vec2(1.0, 0.0)), ModelError);
}

TEST_CASE("model construction errors") {
    CHECK_THROWS_AS(FinslerModel::riemannian({{sf("1"), sf("0.1")}, {sf("0.2"), sf("1")}},
                                             square_domain(1.0)),
                    ConfigError);
    CHECK_THROWS_AS(FinslerModel::riemannian({{sf("1"), sf("x3")}, {sf("x3"), sf("1")}},
                                             square_domain(1.0)),
                    ConfigError);
    CHECK_THROWS_AS(conformal_scale(euclidean2(), sf("x9")), ConfigError);
}
