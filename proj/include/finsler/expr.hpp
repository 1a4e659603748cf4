#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "finsler/dual.hpp"
#include "finsler/errors.hpp"
#include "finsler/types.hpp"

namespace finsler {

// Analytic scalar field of chart coordinates, parsed from text.
//
// Grammar (standard precedence; '^' binds tightest and is
// right-associative, unary minus sits between '^' and '*'):
//
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'pi' | 'e' | 'x'<digits> | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp | log | sqrt | tanh
//
// Fields are immutable after parse and evaluation is pure, so instances
// may be shared freely across threads. Derivatives up to second order
// are exact (forward-mode duals, nested for order two). '^' with a
// constant integer exponent is repeated multiplication; any other
// exponent goes through exp(b*log a) and requires a positive base.
class ScalarField {
  public:
    struct Node;
    using NodePtr = std::shared_ptr<const Node>;

    ScalarField() = default;

    static ScalarField parse(std::string_view text);

    bool empty() const { return !root_; }

    // Smallest point dimension this field can be evaluated at
    // (the largest variable index that occurs).
    int num_vars() const { return num_vars_; }

    template <class T>
    T eval(const VectorT<T>& x) const {
        if (!root_) throw Error("empty expression");
        if (x.size() < num_vars_)
            throw DomainError("point has dimension " + std::to_string(x.size()) +
                              " but expression references x" + std::to_string(num_vars_));
        T r = eval_node(*root_, x.data());
        if (!std::isfinite(primal(r))) throw DomainError("expression evaluated to a non-finite value");
        return r;
    }

    double operator()(const Vector& x) const { return eval<double>(x); }

    // Exact first/second partial derivative at x (0-based axis indices).
    double derivative(const Vector& x, int i) const;
    double derivative(const Vector& x, int i, int j) const;

    std::string to_string() const;

    friend bool same_structure(const ScalarField& a, const ScalarField& b);

  private:
    ScalarField(NodePtr root, int nvars) : root_(std::move(root)), num_vars_(nvars) {}

    template <class T>
    static T eval_node(const Node& n, const T* x);

    NodePtr root_;
    int num_vars_ = 0;

    friend struct ExprParser;
};

struct ScalarField::Node {
    enum class Op : std::uint8_t {
        literal, constant, variable, neg,
        add, sub, mul, div, pow,
        sin, cos, exp, log, sqrt, tanh
    };

    Op op;
    double value = 0.0;           // literal / named constant
    int var = -1;                 // slot for Op::variable
    const char* cname = nullptr;  // "pi" / "e"
    bool int_pow = false;         // '^' with a constant integer exponent
    long long exponent = 0;
    NodePtr a, b;
};

template <class T>
T ScalarField::eval_node(const Node& n, const T* x) {
    using Op = Node::Op;
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    using std::tanh;
    switch (n.op) {
        case Op::literal:
        case Op::constant:
            return T(n.value);
        case Op::variable:
            return x[n.var];
        case Op::neg:
            return -eval_node(*n.a, x);
        case Op::add:
            return eval_node(*n.a, x) + eval_node(*n.b, x);
        case Op::sub:
            return eval_node(*n.a, x) - eval_node(*n.b, x);
        case Op::mul:
            return eval_node(*n.a, x) * eval_node(*n.b, x);
        case Op::div: {
            T num = eval_node(*n.a, x);
            T den = eval_node(*n.b, x);
            if (primal(den) == 0.0) throw DomainError("division by zero");
            return num / den;
        }
        case Op::pow: {
            T base = eval_node(*n.a, x);
            if (n.int_pow) {
                if (n.exponent < 0 && primal(base) == 0.0)
                    throw DomainError("zero raised to a negative power");
                return powi(base, n.exponent);
            }
            T ex = eval_node(*n.b, x);
            if (primal(base) <= 0.0)
                throw DomainError("power with non-positive base and non-integer exponent");
            return exp(ex * log(base));
        }
        case Op::sin:
            return sin(eval_node(*n.a, x));
        case Op::cos:
            return cos(eval_node(*n.a, x));
        case Op::exp:
            return exp(eval_node(*n.a, x));
        case Op::log: {
            T a = eval_node(*n.a, x);
            if (primal(a) <= 0.0) throw DomainError("log of non-positive argument");
            return log(a);
        }
        case Op::sqrt: {
            T a = eval_node(*n.a, x);
            if (primal(a) < 0.0) throw DomainError("sqrt of negative argument");
            return sqrt(a);
        }
        case Op::tanh:
            return tanh(eval_node(*n.a, x));
    }
    throw Error("corrupt expression node");
}

bool same_structure(const ScalarField& a, const ScalarField& b);

}  // namespace finsler
