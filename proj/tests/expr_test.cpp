#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "finsler/expr.hpp"
#include "oracles.hpp"

using namespace finsler;
using finsler::test::fd1;
using finsler::test::fd2;
using finsler::test::rel_err;

namespace {

Vector pt(std::initializer_list<double> v) {
    Vector x(static_cast<long>(v.size()));
    int i = 0;
    for (double d : v) x[i++] = d;
    return x;
}

}  // namespace

TEST_CASE("parse and evaluate basics") {
    ScalarField f = ScalarField::parse("sin(x1)*x2");
    CHECK(f(pt({0.0, 5.0})) == doctest::Approx(0.0).epsilon(1e-15));

    ScalarField g = ScalarField::parse("x1^2 + 3");
    CHECK(g(pt({2.0, 0.0})) == doctest::Approx(7.0));

    ScalarField c = ScalarField::parse("pi");
    CHECK(c(pt({0.0})) == doctest::Approx(std::numbers::pi).epsilon(1e-16));

    CHECK(ScalarField::parse("sqrt(x1)")(pt({4.0})) == doctest::Approx(2.0));
    CHECK(ScalarField::parse("e")(pt({0.0})) == doctest::Approx(std::numbers::e).epsilon(1e-16));
}

TEST_CASE("syntax errors carry byte offsets") {
    try {
        ScalarField::parse("exp(x1");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset == 6);
    }
    CHECK_THROWS_AS(ScalarField::parse(""), SyntaxError);
    CHECK_THROWS_AS(ScalarField::parse("exp()"), SyntaxError);
    CHECK_THROWS_AS(ScalarField::parse("foo(x1)"), SyntaxError);
    CHECK_THROWS_AS(ScalarField::parse("x1 +"), SyntaxError);
    CHECK_THROWS_AS(ScalarField::parse("x1)"), SyntaxError);
    CHECK_THROWS_AS(ScalarField::parse("x0"), SyntaxError);
    CHECK_THROWS_AS(ScalarField::parse("2 @ 3"), SyntaxError);

    try {
        ScalarField::parse("sin(x1) + foo");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.offset == 10);
    }
}

TEST_CASE("precedence and associativity") {
    CHECK(ScalarField::parse("2+3*4")(pt({0.0})) == doctest::Approx(14.0));
    CHECK(ScalarField::parse("2*3^2")(pt({0.0})) == doctest::Approx(18.0));
    CHECK(ScalarField::parse("-2^2")(pt({0.0})) == doctest::Approx(-4.0));
    CHECK(ScalarField::parse("2^-2")(pt({0.0})) == doctest::Approx(0.25));
    CHECK(ScalarField::parse("2^3^2")(pt({0.0})) == doctest::Approx(512.0));
    CHECK(ScalarField::parse("8-3-2")(pt({0.0})) == doctest::Approx(3.0));
    CHECK(ScalarField::parse("8/2/2")(pt({0.0})) == doctest::Approx(2.0));
    CHECK(ScalarField::parse("(2+3)*4")(pt({0.0})) == doctest::Approx(20.0));
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(ScalarField::parse("x1/x2")(pt({1.0, 0.0})), DomainError);
    CHECK_THROWS_AS(ScalarField::parse("log(x1)")(pt({-1.0})), DomainError);
    CHECK_THROWS_AS(ScalarField::parse("log(x1)")(pt({0.0})), DomainError);
    CHECK_THROWS_AS(ScalarField::parse("sqrt(x1)")(pt({-4.0})), DomainError);
    // non-integer exponent requires a positive base
    CHECK_THROWS_AS(ScalarField::parse("x1^0.5")(pt({-2.0})), DomainError);
    CHECK_THROWS_AS(ScalarField::parse("x1^x2")(pt({-2.0, 2.0})), DomainError);
    // integer exponents keep working left of the axis
    CHECK(ScalarField::parse("x1^2")(pt({-3.0})) == doctest::Approx(9.0));
    CHECK(ScalarField::parse("x1^-2")(pt({-2.0})) == doctest::Approx(0.25));
    CHECK_THROWS_AS(ScalarField::parse("x1^-2")(pt({0.0})), DomainError);
    // dimension mismatch
    CHECK_THROWS_AS(ScalarField::parse("x3")(pt({1.0, 2.0})), DomainError);
}

TEST_CASE("exact first and second derivatives") {
    ScalarField f = ScalarField::parse("sin(x1)*x2");
    CHECK(f.derivative(pt({0.0, 5.0}), 0) == doctest::Approx(5.0).epsilon(1e-14));

    ScalarField c = ScalarField::parse("x1^3");
    CHECK(c.derivative(pt({2.0}), 0, 0) == doctest::Approx(12.0).epsilon(1e-14));

    ScalarField m = ScalarField::parse("exp(x1*x2)");
    Vector x = pt({0.7, -0.4});
    double got = m.derivative(x, 0, 1);
    double want = fd2([&](const Vector& z) { return m(z); }, x, 0, 1);
    CHECK(rel_err(got, want) <= 1e-6);

    // derivatives of constants are exactly zero; d(xk)/dxk is exactly one
    CHECK(ScalarField::parse("pi").derivative(pt({1.0, 2.0}), 0) == 0.0);
    CHECK(ScalarField::parse("4.25").derivative(pt({1.0, 2.0}), 1) == 0.0);
    CHECK(ScalarField::parse("x2").derivative(pt({1.0, 2.0}), 1) == 1.0);
    CHECK(ScalarField::parse("x2").derivative(pt({1.0, 2.0}), 0) == 0.0);
}

namespace {

// random expression generator over the full grammar; guarded arguments
// keep log/sqrt and fractional powers inside their domains
std::string random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, 99);
    auto leaf = [&]() -> std::string {
        int c = pick(rng);
        if (c < 45) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.3g",
                          std::uniform_real_distribution<double>(-3.0, 3.0)(rng));
            return buf;
        }
        if (c < 85) return "x" + std::to_string(std::uniform_int_distribution<int>(1, 3)(rng));
        return (c < 93) ? "pi" : "e";
    };
    if (depth <= 0) return leaf();
    int c = pick(rng);
    auto sub = [&] { return random_expr(rng, depth - 1); };
    if (c < 16) return "(" + sub() + "+" + sub() + ")";
    if (c < 32) return "(" + sub() + "-" + sub() + ")";
    if (c < 50) return "(" + sub() + "*" + sub() + ")";
    if (c < 56) return "(" + sub() + "/(0.5+(" + sub() + ")^2))";
    if (c < 64) return "sin(" + sub() + ")";
    if (c < 72) return "cos(" + sub() + ")";
    if (c < 77) return "tanh(" + sub() + ")";
    if (c < 82) return "exp(sin(" + sub() + "))";
    if (c < 87) return "log(0.5+(" + sub() + ")^2)";
    if (c < 92) return "sqrt(0.25+(" + sub() + ")^2)";
    if (c < 96) return "(" + sub() + ")^2";
    if (c < 98) return "(" + sub() + ")^3";
    return "(0.5+(" + sub() + ")^2)^1.5";
}

}  // namespace

TEST_CASE("1000 random samples: derivatives match the finite-difference oracle") {
    std::mt19937 rng(20240811u);
    std::uniform_int_distribution<int> axis(0, 2);
    int accepted = 0;
    while (accepted < 1000) {
        std::string text = random_expr(rng, std::uniform_int_distribution<int>(1, 4)(rng));
        ScalarField f = ScalarField::parse(text);
        Vector x(3);
        for (int d = 0; d < 3; ++d) x[d] = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
        int i = axis(rng), j = axis(rng);
        double fx, d1, d2v, fd1v, fd2v;
        try {
            fx = f(x);
            d1 = f.derivative(x, i);
            d2v = f.derivative(x, i, j);
            fd1v = fd1([&](const Vector& z) { return f(z); }, x, i);
            fd2v = fd2([&](const Vector& z) { return f(z); }, x, i, j);
        } catch (const DomainError&) {
            continue;
        }
        // keep the oracle itself well-conditioned: second differences of a
        // function of size |f| carry roundoff ~ eps |f| / h^2
        if (std::abs(fx) > 1e3 || std::abs(d1) > 1e6 || std::abs(d2v) > 1e6) continue;
        ++accepted;
        INFO("expr: " << text << " at x = (" << x[0] << ", " << x[1] << ", " << x[2] << ")"
                      << " d(" << i << "," << j << ")");
        CHECK(rel_err(d1, fd1v) <= 1e-6);
        CHECK(rel_err(d2v, fd2v) <= 1e-6);
    }
}

TEST_CASE("print/parse round trip is structurally identical") {
    const char* fixed[] = {
        "sin(x1)*x2",      "x1^2 + 3",          "-x1^2",       "x1^-2",
        "2^3^2",           "(x1+x2)*(x1-x2)",   "x1/x2/x3",    "exp(x1*x2)-tanh(x2)",
        "sqrt(1+x1^2)",    "log(2.5)*pi - e",   "-(-x1)",      "1e-3*x1 + 2.5e2",
    };
    for (const char* t : fixed) {
        ScalarField f = ScalarField::parse(t);
        ScalarField g = ScalarField::parse(f.to_string());
        INFO("expr: " << t << " printed: " << f.to_string());
        CHECK(same_structure(f, g));
    }

    std::mt19937 rng(77u);
    for (int k = 0; k < 500; ++k) {
        std::string text = random_expr(rng, std::uniform_int_distribution<int>(1, 4)(rng));
        ScalarField f = ScalarField::parse(text);
        ScalarField g = ScalarField::parse(f.to_string());
        INFO("expr: " << text << " printed: " << f.to_string());
        REQUIRE(same_structure(f, g));
    }
}

TEST_CASE("num_vars reports the largest referenced variable") {
    CHECK(ScalarField::parse("x1 + x3").num_vars() == 3);
    CHECK(ScalarField::parse("pi").num_vars() == 0);
    CHECK(ScalarField::parse("sin(x2)").num_vars() == 2);
}
