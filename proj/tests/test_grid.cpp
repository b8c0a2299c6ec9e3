#include <doctest.h>

#include <cmath>

#include "nsvar/grid.hpp"
#include "nsvar/report.hpp"
#include "nsvar/rng.hpp"

using namespace nsvar;

namespace {

std::vector<double> midpoint_samples(const TimeGrid& g, double (*fn)(double)) {
    std::vector<double> s(static_cast<size_t>(g.cells()));
    for (int k = 0; k < g.cells(); ++k) s[static_cast<size_t>(k)] = fn(g.midpoint(k));
    return s;
}

}  // namespace

TEST_CASE("quadrature: constant and zero integrands") {
    auto g = TimeGrid::uniform(0.0, 1.0, 64);
    auto m = DiscreteMeasure::lebesgue(g);
    std::vector<double> ones(64, 1.0), zeroes(64, 0.0);
    CHECK(quadrature(ones, m) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(quadrature(zeroes, m) == 0.0);
}

TEST_CASE("quadrature: g(t)=t on [0,1] with N=1000") {
    auto g = TimeGrid::uniform(0.0, 1.0, 1000);
    auto m = DiscreteMeasure::lebesgue(g);
    auto s = midpoint_samples(g, [](double t) { return t; });
    // analytic antiderivative: t^2/2 over [0,1] -> 0.5
    CHECK(std::abs(quadrature(s, m) - 0.5) < 1e-6);
}

TEST_CASE("quadrature: atoms evaluate at nodes") {
    auto g = TimeGrid::uniform(0.0, 1.0, 4);
    DiscreteMeasure m(g, {1.0, 1.0, 1.0, 1.0}, {{2, 2.0}});
    std::vector<double> cells(4, 1.0);
    std::vector<double> nodes(5, 0.0);
    nodes[2] = 3.0;
    CHECK(quadrature(cells, nodes, m) == doctest::Approx(1.0 + 6.0));
    CHECK_THROWS_AS(quadrature(cells, m), structural_error);  // atoms need node samples
}

TEST_CASE("quadrature: length mismatch is a structural error") {
    auto g = TimeGrid::uniform(0.0, 1.0, 8);
    auto m = DiscreteMeasure::lebesgue(g);
    std::vector<double> bad(7, 1.0);
    CHECK_THROWS_AS(quadrature(bad, m), structural_error);
}

TEST_CASE("quadrature is linear") {
    auto grid = TimeGrid::uniform(0.0, 2.0, 37);
    DiscreteMeasure m(grid, std::vector<double>(37, 0.5), {{5, 0.25}});
    CounterRng rng(11, 1);
    std::vector<double> g(37), h(37), combo(37);
    std::vector<double> gn(38), hn(38), cn(38);
    const double alpha = 1.7, beta = -0.4;
    for (size_t i = 0; i < 37; ++i) {
        g[i] = rng.uniform(i, -2.0, 2.0);
        h[i] = rng.uniform(1000 + i, -2.0, 2.0);
        combo[i] = alpha * g[i] + beta * h[i];
    }
    for (size_t i = 0; i < 38; ++i) {
        gn[i] = rng.uniform(2000 + i, -2.0, 2.0);
        hn[i] = rng.uniform(3000 + i, -2.0, 2.0);
        cn[i] = alpha * gn[i] + beta * hn[i];
    }
    const double lhs = quadrature(combo, cn, m);
    const double rhs = alpha * quadrature(g, gn, m) + beta * quadrature(h, hn, m);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("quadrature refinement is second order on smooth integrands") {
    auto err_at = [](int n) {
        auto g = TimeGrid::uniform(0.0, 1.0, n);
        auto m = DiscreteMeasure::lebesgue(g);
        auto s = midpoint_samples(g, [](double t) { return std::exp(t); });
        return std::abs(quadrature(s, m) - (std::exp(1.0) - 1.0));
    };
    const double e1 = err_at(50), e2 = err_at(100);
    CHECK(e1 / e2 > 3.5);  // midpoint rule: error ~ N^-2, so halving h quarters it
    CHECK(e1 / e2 < 4.5);
}

TEST_CASE("curve_derivative: linear and constant arcs") {
    auto g = TimeGrid::uniform(0.0, 1.0, 10);
    std::vector<double> line, flat;
    for (double t : g.nodes()) {
        line.push_back(t);
        flat.push_back(3.0);
    }
    auto dl = curve_derivative(Curve::scalar(g, line));
    auto df = curve_derivative(Curve::scalar(g, flat));
    for (int k = 0; k < 10; ++k) {
        CHECK(dl.at_cell(k)[0] == doctest::Approx(1.0));
        CHECK(df.at_cell(k)[0] == 0.0);
    }
}

TEST_CASE("curve_derivative: exact difference quotient of a quadratic") {
    auto g = TimeGrid::uniform(0.0, 1.0, 100);
    std::vector<double> sq;
    for (double t : g.nodes()) sq.push_back(t * t);
    auto d = curve_derivative(Curve::scalar(g, sq));
    for (int k = 0; k < 100; ++k) {
        // (t2^2 - t1^2)/(t2-t1) = t1 + t2
        CHECK(d.at_cell(k)[0] == doctest::Approx(g.node(k) + g.node(k + 1)).epsilon(1e-12));
    }
}

TEST_CASE("curve_derivative rejects piecewise-constant curves") {
    auto g = TimeGrid::uniform(0.0, 1.0, 4);
    Curve c = Curve::scalar(g, {0, 1, 2, 3, 4}, Interp::RightConstant);
    CHECK_THROWS_AS(curve_derivative(c), structural_error);
}

TEST_CASE("derivative then cumulative integral returns the curve at nodes") {
    CounterRng rng(7, 2);
    std::vector<double> nodes{0.0, 0.13, 0.4, 0.55, 0.9, 1.0};
    auto g = TimeGrid::from_nodes(nodes);
    std::vector<Vec> vals;
    for (size_t i = 0; i < nodes.size(); ++i)
        vals.push_back({rng.uniform(i, -5.0, 5.0), rng.uniform(100 + i, -5.0, 5.0)});
    Curve x(g, vals);
    Curve back = cumulative_integral(curve_derivative(x), x.values.front());
    for (size_t i = 0; i < nodes.size(); ++i)
        for (int d = 0; d < 2; ++d)
            CHECK(back.values[i][static_cast<size_t>(d)] ==
                  doctest::Approx(vals[i][static_cast<size_t>(d)]).epsilon(1e-12));
}

TEST_CASE("lp_norm: reference cases") {
    auto g1 = TimeGrid::uniform(0.0, 1.0, 16);
    auto m1 = DiscreteMeasure::lebesgue(g1);
    CHECK(lp_norm(StepFunction::constant(g1, {1.0}), 2.0, m1) == doctest::Approx(1.0));
    CHECK(lp_norm(StepFunction::constant(g1, {0.0}), 1.0, m1) == 0.0);
    CHECK(lp_norm(StepFunction::constant(g1, {0.0}), kInf, m1) == 0.0);

    auto g2 = TimeGrid::uniform(0.0, 1.0, 2);
    auto m2 = DiscreteMeasure::lebesgue(g2);
    StepFunction y = StepFunction::scalar(g2, {1.0, 3.0});
    CHECK(lp_norm(y, kInf, m2) == 3.0);

    CHECK_THROWS_AS(lp_norm(y, 0.5, m2), structural_error);
}

TEST_CASE("lp_norm satisfies the triangle inequality") {
    auto g = TimeGrid::uniform(0.0, 1.0, 25);
    auto m = DiscreteMeasure::lebesgue(g);
    CounterRng rng(99, 3);
    for (uint64_t trial = 0; trial < 50; ++trial) {
        const double p = std::vector<double>{1.0, 1.5, 2.0, 3.0, kInf}[trial % 5];
        std::vector<double> a(25), b(25), s(25);
        for (size_t i = 0; i < 25; ++i) {
            a[i] = rng.uniform(trial * 100 + i, -4.0, 4.0);
            b[i] = rng.uniform(trial * 100 + 50 + i, -4.0, 4.0);
            s[i] = a[i] + b[i];
        }
        const double na = lp_norm(StepFunction::scalar(g, a), p, m);
        const double nb = lp_norm(StepFunction::scalar(g, b), p, m);
        const double ns = lp_norm(StepFunction::scalar(g, s), p, m);
        CHECK(ns <= na + nb + 1e-12);
    }
}

TEST_CASE("grid invariants are enforced") {
    CHECK_THROWS_AS(TimeGrid::from_nodes({0.0, 0.0, 1.0}), structural_error);
    CHECK_THROWS_AS(TimeGrid::uniform(1.0, 0.0, 4), structural_error);
    CHECK_THROWS_AS(DiscreteMeasure(TimeGrid::uniform(0, 1, 2), {1.0, -0.5}), structural_error);
    CHECK_THROWS_AS(StepFunction::scalar(TimeGrid::uniform(0, 1, 2), {1.0}), structural_error);
}

TEST_CASE("curve JSON schema round trip") {
    auto g = TimeGrid::from_nodes({0.0, 0.25, 0.7, 1.0});
    Curve c(g, {{1.0, 2.0}, {0.5, -1.0}, {0.0, 0.0}, {3.0, 4.0}}, Interp::RightConstant);
    const auto j = curve_to_json(c);
    CHECK(j.at("interp") == "rc-constant");
    CHECK(j.at("a") == 0.0);
    CHECK(j.at("nodes").size() == 4);
    Curve back = curve_from_json(j);
    CHECK(back.interp == Interp::RightConstant);
    CHECK(back.dim == 2);
    for (size_t i = 0; i < 4; ++i)
        for (size_t d = 0; d < 2; ++d) CHECK(back.values[i][d] == c.values[i][d]);
    json missing = j;
    missing.erase("interp");
    CHECK_THROWS_AS(curve_from_json(missing), structural_error);
}

TEST_CASE("with_node refines and keeps measure consistent") {
    auto g = TimeGrid::uniform(0.0, 1.0, 4);
    DiscreteMeasure m(g, {1.0, 2.0, 3.0, 4.0}, {{1, 0.5}});
    auto g2 = g.with_node(0.4).with_node(0.9);
    auto m2 = refine_measure(m, g2);
    CHECK(m2.grid.cells() == 6);
    CHECK(m2.total() == doctest::Approx(m.total()).epsilon(1e-13));
    std::vector<double> ones(6, 1.0), onesn(7, 1.0);
    std::vector<double> ones4(4, 1.0), onesn4(5, 1.0);
    CHECK(quadrature(ones, onesn, m2) == doctest::Approx(quadrature(ones4, onesn4, m)));
}
