#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "finsler/expr.hpp"
#include "finsler/types.hpp"

namespace finsler {

enum class Family { riemannian, randers, conformal_scaled };

// All pointwise structure of a Finsler metric at one (x, y): the value F,
// the fundamental tensor and its inverse, the unit vector l and its
// covariant form, x-derivatives of g, and the Cartan tensor.
struct PointTensors {
    double F = 0.0;
    Vector l_up, l_cov;
    Matrix g, g_inv;
    std::vector<Matrix> dg_dx;  // [k](i,j) = dg_ij / dx^k
    Tensor3 cartan;             // C_ijk, totally symmetric
};

struct ValidationReport {
    bool valid = true;
    std::string message;
    double min_metric_eigenvalue = std::numeric_limits<double>::infinity();
    double min_randers_margin = std::numeric_limits<double>::infinity();  // 1 - ||b||_a
    bool has_randers_margin = false;
    long long samples = 0;
};

// Chart-domain Finsler structure. Three families: Riemannian
// (F = sqrt(a_ij y^i y^j)), Randers (F = sqrt(a_ij y^i y^j) + b_i y^i)
// and a conformal rescaling e^{sigma(x)} F of any base model. Models are
// immutable and cheap to copy; evaluation is pure.
class FinslerModel {
  public:
    struct Impl {
        Family family = Family::riemannian;
        int n = 0;
        Box box;
        std::vector<ScalarField> a;  // upper triangle, row-major (i <= j)
        std::vector<ScalarField> b;  // randers one-form
        ScalarField sigma;           // conformal factor exponent
        std::shared_ptr<const Impl> base;

        static int tri(int n, int i, int j) {
            if (i > j) std::swap(i, j);
            return i * n - i * (i - 1) / 2 + (j - i);
        }
        const ScalarField& a_field(int i, int j) const { return a[tri(n, i, j)]; }
    };

    FinslerModel() = default;

    // a is the full n-by-n coefficient matrix; it must be structurally
    // symmetric (identical expressions across the diagonal).
    static FinslerModel riemannian(std::vector<std::vector<ScalarField>> a, Box domain);
    static FinslerModel randers(std::vector<std::vector<ScalarField>> a,
                                std::vector<ScalarField> b, Box domain);

    int dimension() const { return impl_->n; }
    Family family() const { return impl_->family; }
    const Box& domain() const { return impl_->box; }
    const Impl& impl() const { return *impl_; }
    std::shared_ptr<const Impl> impl_ptr() const { return impl_; }
    bool valid_handle() const { return impl_ != nullptr; }

    // F(x, y), generic over the scalar so duals flow through.
    template <class T>
    T value(const VectorT<T>& x, const VectorT<T>& y) const {
        return value_impl(*impl_, x, y);
    }

    // F^2(x, y); avoids the outer square root for Riemannian metrics.
    template <class T>
    T value_sq(const VectorT<T>& x, const VectorT<T>& y) const {
        return value_sq_impl(*impl_, x, y);
    }

    template <class T>
    static T value_impl(const Impl& im, const VectorT<T>& x, const VectorT<T>& y) {
        using std::exp;
        using std::sqrt;
        switch (im.family) {
            case Family::riemannian: {
                T s = quad_form(im, x, y);
                if (primal(s) <= 0.0) throw ModelError("riemannian quadratic form not positive");
                return sqrt(s);
            }
            case Family::randers: {
                T s = quad_form(im, x, y);
                if (primal(s) <= 0.0) throw ModelError("randers quadratic form not positive");
                T f = sqrt(s) + one_form(im, x, y);
                if (primal(f) <= 0.0) throw ModelError("randers norm not positive (one-form too large)");
                return f;
            }
            case Family::conformal_scaled:
                return exp(im.sigma.eval(x)) * value_impl(*im.base, x, y);
        }
        throw Error("corrupt model");
    }

    template <class T>
    static T value_sq_impl(const Impl& im, const VectorT<T>& x, const VectorT<T>& y) {
        using std::exp;
        switch (im.family) {
            case Family::riemannian:
                return quad_form(im, x, y);
            case Family::randers: {
                T f = value_impl(im, x, y);
                return f * f;
            }
            case Family::conformal_scaled: {
                T s = im.sigma.eval(x);
                return exp(2.0 * s) * value_sq_impl(*im.base, x, y);
            }
        }
        throw Error("corrupt model");
    }

  private:
    explicit FinslerModel(std::shared_ptr<const Impl> im) : impl_(std::move(im)) {}

    template <class T>
    static T quad_form(const Impl& im, const VectorT<T>& x, const VectorT<T>& y) {
        T s(0.0);
        for (int i = 0; i < im.n; ++i)
            for (int j = i; j < im.n; ++j) {
                T term = im.a_field(i, j).eval(x) * y[i] * y[j];
                s = s + (i == j ? term : 2.0 * term);
            }
        return s;
    }

    template <class T>
    static T one_form(const Impl& im, const VectorT<T>& x, const VectorT<T>& y) {
        T s(0.0);
        for (int i = 0; i < im.n; ++i) s = s + im.b[i].eval(x) * y[i];
        return s;
    }

    std::shared_ptr<const Impl> impl_;

    friend FinslerModel conformal_scale(const FinslerModel&, ScalarField);
};

// pointwise tensors ------------------------------------------------------

double eval_F(const FinslerModel& m, const Vector& x, const Vector& y);
Matrix fundamental_tensor(const FinslerModel& m, const Vector& x, const Vector& y);
Matrix inverse_fundamental(const FinslerModel& m, const Vector& x, const Vector& y);
double angle_cos(const FinslerModel& m, const Vector& x, const Vector& u, const Vector& v);
Tensor3 cartan_tensor(const FinslerModel& m, const Vector& x, const Vector& y);
Tensor3 formal_christoffel(const FinslerModel& m, const Vector& x, const Vector& y);
Matrix nonlinear_connection(const FinslerModel& m, const Vector& x, const Vector& y);  // N^i_j / F

FinslerModel conformal_scale(const FinslerModel& m, ScalarField sigma);
ValidationReport validate_model(const FinslerModel& m);
ValidationReport validate_model(const FinslerModel& m, const Box& region);

PointTensors point_tensors(const FinslerModel& m, const Vector& x, const Vector& y);
Tensor3 christoffel_of(const PointTensors& pt);
Matrix connection_of(const PointTensors& pt, const Tensor3& gamma);

}  // namespace finsler
