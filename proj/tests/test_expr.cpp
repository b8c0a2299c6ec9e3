#include <doctest.h>

#include <cmath>

#include "nsvar/expr.hpp"

using namespace nsvar;

TEST_CASE("expression grammar") {
    CHECK(Expr::parse_t("1 + 2*3").eval_t(0.0) == 7.0);
    CHECK(Expr::parse_t("t*t - 1").eval_t(3.0) == 8.0);
    CHECK(Expr::parse_t("sin(t)").eval_t(M_PI / 2) == doctest::Approx(1.0));
    CHECK(Expr::parse_t("cos(0)").eval_t(5.0) == 1.0);
    CHECK(Expr::parse_t("exp(1)").eval_t(0.0) == doctest::Approx(std::exp(1.0)));
    CHECK(Expr::parse_t("abs(0-t)").eval_t(2.5) == 2.5);
    CHECK(Expr::parse_t("min(t, 1)").eval_t(4.0) == 1.0);
    CHECK(Expr::parse_t("max(t, 1)").eval_t(4.0) == 4.0);
    CHECK(Expr::parse_t("pow(t, 3)").eval_t(2.0) == 8.0);
    CHECK(Expr::parse_t("t^2").eval_t(3.0) == 9.0);
    CHECK(Expr::parse_t("2^t^2").eval_t(1.5) == doctest::Approx(std::pow(2.0, 2.25)));
    CHECK(Expr::parse_t("-t^2").eval_t(2.0) == -4.0);  // unary minus binds the whole power
    CHECK(Expr::parse_t("(1 - t)/(1 + t)").eval_t(0.5) == doctest::Approx(1.0 / 3.0));
    CHECK(Expr::parse_t("pi").eval_t(0.0) == doctest::Approx(M_PI));
}

TEST_CASE("multi-variable expressions") {
    Expr e = Expr::parse("u*w - abs(u - w)", {"u", "w"});
    const double vals[] = {2.0, 5.0};
    CHECK(e.eval(vals) == doctest::Approx(10.0 - 3.0));
}

TEST_CASE("parse errors are structural") {
    CHECK_THROWS_AS(Expr::parse_t("t +"), structural_error);
    CHECK_THROWS_AS(Expr::parse_t("sin(t"), structural_error);
    CHECK_THROWS_AS(Expr::parse_t("foo(t)"), structural_error);
    CHECK_THROWS_AS(Expr::parse_t("x"), structural_error);
    CHECK_THROWS_AS(Expr::parse_t("min(t)"), structural_error);
    CHECK_THROWS_AS(Expr::parse_t("1 2"), structural_error);
}
