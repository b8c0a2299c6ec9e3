#include <doctest.h>

#include <cmath>

#include "nsvar/catalog.hpp"
#include "nsvar/clarke.hpp"
#include "nsvar/rng.hpp"

using namespace nsvar;

namespace {

double abs1(const Vec& x) { return std::abs(x[0]); }
double neg_abs(const Vec& x) { return -std::abs(x[0]); }
double smooth_sq(const Vec& x) { return 0.5 * x[0] * x[0]; }

// independent oracle: exhaustive (y, t) lattice for the limsup at radius r
double brute_dirderiv_1d(double (*g)(const Vec&), double x, double v, double r, int ny = 4001,
                         int nt = 400) {
    double best = -kInf;
    for (int i = 0; i < ny; ++i) {
        const double y = x - r + 2.0 * r * i / (ny - 1);
        for (int j = 1; j <= nt; ++j) {
            const double t = r * j / nt;
            best = std::max(best, (g({y + t * v}) - g({y})) / t);
        }
    }
    return best;
}

IntegralFunctional functional(IntegrandOracle f, int n) {
    return {std::move(f), DiscreteMeasure::lebesgue(TimeGrid::uniform(0.0, 1.0, n)), 2.0};
}

}  // namespace

TEST_CASE("clarke_dirderiv matches analytic values") {
    ClarkeConfig cfg;
    SUBCASE("|.| at 0") {
        auto r = clarke_dirderiv(abs1, {0.0}, {1.0}, cfg);
        CHECK(std::abs(r.value - 1.0) <= 5e-2);
        CHECK(r.stabilized);
    }
    SUBCASE("-|.| at 0: the limsup still sees slope 1") {
        // brute-force over a fine (y, t) lattice confirms the supremum is 1
        CHECK(brute_dirderiv_1d(neg_abs, 0.0, 1.0, 1e-3) == doctest::Approx(1.0).epsilon(1e-2));
        auto r = clarke_dirderiv(neg_abs, {0.0}, {1.0}, cfg);
        CHECK(std::abs(r.value - 1.0) <= 5e-2);
    }
    SUBCASE("smooth x^2/2 at 1 matches the gradient") {
        auto r = clarke_dirderiv(smooth_sq, {1.0}, {1.0}, cfg);
        CHECK(std::abs(r.value - 1.0) <= 1e-2);
    }
}

TEST_CASE("clarke_dirderiv properties") {
    ClarkeConfig cfg;
    SUBCASE("positive homogeneity") {
        for (double lam : {0.5, 2.0}) {
            const double d1 = clarke_dirderiv(abs1, {0.0}, {1.0}, cfg).value;
            const double dl = clarke_dirderiv(abs1, {0.0}, {lam}, cfg).value;
            CHECK(std::abs(dl - lam * d1) <= 5e-2 * lam);
        }
    }
    SUBCASE("subadditivity in v (2D)") {
        auto g = [](const Vec& x) { return std::abs(x[0]) + 0.5 * std::abs(x[1]); };
        CounterRng rng(3, 21);
        for (uint64_t trial = 0; trial < 8; ++trial) {
            const Vec v = rng.direction(trial, 2);
            const Vec w = rng.direction(100 + trial, 2);
            const double dv = clarke_dirderiv(g, {0.0, 0.0}, v, cfg).value;
            const double dw = clarke_dirderiv(g, {0.0, 0.0}, w, cfg).value;
            const double dvw = clarke_dirderiv(g, {0.0, 0.0}, add(v, w), cfg).value;
            CHECK(dvw <= dv + dw + 5e-2);
        }
    }
    SUBCASE("Lipschitz bound") {
        auto g = [](const Vec& x) { return 2.0 * std::abs(x[0]); };
        for (double v : {1.0, -1.0, 0.3}) {
            const double d = clarke_dirderiv(g, {0.2}, {v}, cfg).value;
            CHECK(std::abs(d) <= (2.0 + 5e-2) * std::abs(v));
        }
    }
    SUBCASE("zero direction gives zero") {
        CHECK(clarke_dirderiv(abs1, {0.0}, {0.0}, cfg).value == 0.0);
    }
    SUBCASE("non-Lipschitz behavior is detected") {
        auto g = [](const Vec& x) { return std::sqrt(std::abs(x[0])); };
        CHECK_THROWS_AS(clarke_dirderiv(g, {0.0}, {1.0}, cfg), oracle_error);
    }
}

TEST_CASE("clarke_membership in 1D is an interval test") {
    ClarkeConfig cfg;
    SUBCASE("|.|: 0.5 inside, 1.2 outside") {
        auto in = clarke_membership(abs1, {0.0}, {0.5}, cfg);
        CHECK(in.member);
        CHECK(in.margin == doctest::Approx(0.5).epsilon(0.1));
        auto out = clarke_membership(abs1, {0.0}, {1.2}, cfg);
        CHECK_FALSE(out.member);
        CHECK(out.margin == doctest::Approx(-0.2).epsilon(0.3));
        CHECK(out.worst_direction[0] == doctest::Approx(1.0));
    }
    SUBCASE("-|.|: Clarke subdifferential at 0 is [-1, 1]") {
        CHECK(clarke_membership(neg_abs, {0.0}, {0.0}, cfg).member);
        CHECK(clarke_membership(neg_abs, {0.0}, {0.9}, cfg).member);
        CHECK_FALSE(clarke_membership(neg_abs, {0.0}, {1.3}, cfg).member);
    }
    SUBCASE("agrees with the convex subdifferential at eps = 0") {
        auto f = make_abs(1, 0, Expr::parse_t("0"));
        for (double s : {-0.9, -0.3, 0.0, 0.4, 0.99}) {
            const bool convex_side = eps_subdiff_contains(f, 0.0, {0.0}, {s}, 0.0, 5e-2);
            const bool clarke_side = clarke_membership(abs1, {0.0}, {s}, cfg).member;
            CHECK(convex_side == clarke_side);
        }
        CHECK_FALSE(clarke_membership(abs1, {0.0}, {1.5}, cfg).member);
        CHECK_FALSE(eps_subdiff_contains(f, 0.0, {0.0}, {1.5}, 0.0, 5e-2));
    }
}

TEST_CASE("integral_clarke_inclusion") {
    ClarkeConfig cfg;
    SUBCASE("|.| with s = 0.3 passes all cells") {
        auto F = functional(make_abs(1, 0, Expr::parse_t("0")), 25);
        const auto& g = F.measure.grid;
        Report rep = integral_clarke_inclusion(F, StepFunction::constant(g, {0.0}),
                                               StepFunction::constant(g, {0.3}), cfg);
        CHECK(rep.pass);
    }
    SUBCASE("|.| with s = 1.5 fails on every cell") {
        auto F = functional(make_abs(1, 0, Expr::parse_t("0")), 25);
        const auto& g = F.measure.grid;
        Report rep = integral_clarke_inclusion(F, StepFunction::constant(g, {0.0}),
                                               StepFunction::constant(g, {1.5}), cfg);
        CHECK_FALSE(rep.pass);
        CHECK(rep.lhs == doctest::Approx(1.0));  // whole horizon violates
    }
    SUBCASE("kink curve x(t) = t under |x - t|") {
        auto F = functional(make_abs(1, 0, Expr::parse_t("t")), 25);
        const auto& g = F.measure.grid;
        std::vector<double> xo(25);
        for (int k = 0; k < 25; ++k) xo[static_cast<size_t>(k)] = g.midpoint(k);
        Report rep = integral_clarke_inclusion(F, StepFunction::scalar(g, xo),
                                               StepFunction::constant(g, {0.7}), cfg);
        CHECK(rep.pass);
    }
}

TEST_CASE("clarke_upper_bound_check") {
    ClarkeConfig cfg;
    SUBCASE("|.| at 0 with v = 1: both sides 1") {
        auto F = functional(make_abs(1, 0, Expr::parse_t("0")), 20);
        const auto& g = F.measure.grid;
        Report rep = clarke_upper_bound_check(F, StepFunction::constant(g, {0.0}),
                                              StepFunction::constant(g, {1.0}), cfg);
        CHECK(rep.pass);
        CHECK(rep.lhs == doctest::Approx(1.0).epsilon(0.06));
        CHECK(rep.rhs == doctest::Approx(1.0).epsilon(0.06));
    }
    SUBCASE("smooth quadratic: equality within sampling slack") {
        auto F = functional(make_quadratic({Expr::parse_t("0")}, {1.0}, Expr::parse_t("0")), 20);
        const auto& g = F.measure.grid;
        CounterRng rng(9, 22);
        std::vector<double> xv(20), vv(20);
        for (size_t i = 0; i < 20; ++i) {
            xv[i] = rng.uniform(i, -1.0, 1.0);
            vv[i] = rng.uniform(100 + i, -1.0, 1.0);
        }
        auto xs = StepFunction::scalar(g, xv);
        auto vs = StepFunction::scalar(g, vv);
        Report rep = clarke_upper_bound_check(F, xs, vs, cfg);
        CHECK(rep.pass);
        // rhs should be close to int x(t) v(t) dt
        double pairing = 0.0;
        for (int k = 0; k < 20; ++k)
            pairing += xv[static_cast<size_t>(k)] * vv[static_cast<size_t>(k)] * F.measure.cell_mass(k);
        CHECK(rep.rhs == doctest::Approx(pairing).epsilon(0.05));
    }
    SUBCASE("-|.|: inequality only, never violated") {
        auto F = functional(make_neg_norm(1), 20);
        const auto& g = F.measure.grid;
        Report rep = clarke_upper_bound_check(F, StepFunction::constant(g, {0.0}),
                                              StepFunction::constant(g, {1.0}), cfg);
        CHECK(rep.pass);
        CHECK(rep.lhs <= rep.rhs + cfg.tol);
    }
}

TEST_CASE("upper bound never fails across the Lipschitz catalog") {
    ClarkeConfig cfg;
    std::vector<IntegrandOracle> members = {
        make_abs(1, 0, Expr::parse_t("t")), make_neg_norm(1),
        make_min_quadratics(Expr::parse_t("0.5")),
        make_quadratic({Expr::parse_t("sin(t)")}, {1.0}, Expr::parse_t("0"))};
    CounterRng rng(17, 23);
    uint64_t c = 0;
    for (auto& f : members) {
        auto F = functional(f, 12);
        const auto& g = F.measure.grid;
        for (int trial = 0; trial < 3; ++trial) {
            std::vector<double> xv(12), vv(12);
            for (size_t i = 0; i < 12; ++i) {
                xv[i] = rng.uniform(c++, -1.5, 1.5);
                vv[i] = rng.uniform(c++, -1.0, 1.0);
            }
            Report rep = clarke_upper_bound_check(F, StepFunction::scalar(g, xv),
                                                  StepFunction::scalar(g, vv), cfg);
            CHECK(rep.pass);
        }
    }
}
