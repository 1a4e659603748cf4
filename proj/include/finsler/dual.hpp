#pragma once

#include <cmath>

#include <Eigen/Core>

namespace finsler {

// Forward-mode dual scalar: a value plus one directional derivative.
// Nesting (Dual<Dual<double>>) yields exact mixed second derivatives;
// expression and metric evaluation are templated on the scalar type so
// the same code path serves plain evaluation and differentiation.
template <class T>
struct Dual {
    T v{};
    T d{};

    Dual() = default;
    Dual(double s) : v(s), d(0.0) {}
    Dual(T value, T deriv) : v(value), d(deriv) {}
};

using Dual1 = Dual<double>;
using Dual2 = Dual<Dual<double>>;

inline double primal(double x) { return x; }
template <class T>
double primal(const Dual<T>& x) {
    return primal(x.v);
}

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator+(const Dual<T>& a, double b) { return {a.v + b, a.d}; }
template <class T> Dual<T> operator+(double a, const Dual<T>& b) { return {a + b.v, b.d}; }

template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, double b) { return {a.v - b, a.d}; }
template <class T> Dual<T> operator-(double a, const Dual<T>& b) { return {a - b.v, -b.d}; }

template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) { return {a.v * b.v, a.v * b.d + a.d * b.v}; }
template <class T> Dual<T> operator*(const Dual<T>& a, double b) { return {a.v * b, a.d * b}; }
template <class T> Dual<T> operator*(double a, const Dual<T>& b) { return {a * b.v, a * b.d}; }

template <class T>
Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
    T q = a.v / b.v;
    return {q, (a.d - q * b.d) / b.v};
}
template <class T> Dual<T> operator/(const Dual<T>& a, double b) { return {a.v / b, a.d / b}; }
template <class T>
Dual<T> operator/(double a, const Dual<T>& b) {
    T q = a / b.v;
    return {q, -((q / b.v) * b.d)};
}

template <class T>
Dual<T> sin(const Dual<T>& a) {
    using std::cos;
    using std::sin;
    return {sin(a.v), cos(a.v) * a.d};
}

template <class T>
Dual<T> cos(const Dual<T>& a) {
    using std::cos;
    using std::sin;
    return {cos(a.v), -(sin(a.v) * a.d)};
}

template <class T>
Dual<T> exp(const Dual<T>& a) {
    using std::exp;
    T e = exp(a.v);
    return {e, e * a.d};
}

template <class T>
Dual<T> log(const Dual<T>& a) {
    using std::log;
    return {log(a.v), a.d / a.v};
}

template <class T>
Dual<T> sqrt(const Dual<T>& a) {
    using std::sqrt;
    T s = sqrt(a.v);
    return {s, a.d / (2.0 * s)};
}

template <class T>
Dual<T> tanh(const Dual<T>& a) {
    using std::tanh;
    T t = tanh(a.v);
    return {t, (1.0 - t * t) * a.d};
}

// Integer power by repeated multiplication; valid for any sign of the
// base, so x^2 keeps working left of the axis where exp/log would not.
template <class T>
T powi(const T& base, long long k) {
    if (k < 0) return T(1.0) / powi(base, -k);
    T r(1.0);
    T b = base;
    long long e = k;
    while (e > 0) {
        if (e & 1) r = r * b;
        b = b * b;
        e >>= 1;
    }
    return r;
}

}  // namespace finsler

namespace Eigen {

template <class T>
struct NumTraits<finsler::Dual<T>> {
    typedef finsler::Dual<T> Real;
    typedef finsler::Dual<T> NonInteger;
    typedef finsler::Dual<T> Nested;
    typedef double Literal;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 2 * NumTraits<double>::ReadCost,
        AddCost = 2 * NumTraits<double>::AddCost,
        MulCost = 4 * NumTraits<double>::MulCost
    };
    static finsler::Dual<T> epsilon() { return NumTraits<double>::epsilon(); }
    static finsler::Dual<T> dummy_precision() { return NumTraits<double>::dummy_precision(); }
    static finsler::Dual<T> highest() { return NumTraits<double>::highest(); }
    static finsler::Dual<T> lowest() { return NumTraits<double>::lowest(); }
    static int digits10() { return NumTraits<double>::digits10(); }
};

}  // namespace Eigen
