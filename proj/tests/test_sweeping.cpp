#include <doctest.h>

#include <cmath>

#include "nsvar/catalog.hpp"
#include "nsvar/sweeping.hpp"

using namespace nsvar;

namespace {

MovingSet sliding_tube() {
    json spec = {{"kind", "interval"}, {"lo", "t"}, {"hi", "t+1"}};
    return moving_set_from_json(spec);
}

MovingSet fixed_ball() {
    json spec = {{"kind", "ball"}, {"center", {"0", "0"}}, {"radius", "1"}};
    return moving_set_from_json(spec);
}

MovingSet jumping_interval() {
    json spec = {{"kind", "interval"},
                 {"lo", "0"},
                 {"hi", "1"},
                 {"jumps", {{{"t", 0.5}, {"kind", "interval"}, {"lo", "2"}, {"hi", "3"}}}}};
    return moving_set_from_json(spec);
}

BVSolution flip_active_densities(BVSolution sol) {
    for (auto& cell : sol.density.cell_values)
        if (norm2(cell) > 1e-9) cell = scale(-1.0, cell);
    for (auto& atom : sol.atom_density) atom = scale(-1.0, atom);
    return sol;
}

}  // namespace

TEST_CASE("catching_up: sliding tube pushes the state along max(0.5, t)") {
    auto g = TimeGrid::uniform(0.0, 1.0, 64);
    BVSolution sol = catching_up(sliding_tube(), {0.5}, g);
    for (size_t i = 0; i < g.nodes().size(); ++i) {
        const double t = g.node(static_cast<int>(i));
        CHECK(sol.x.values[i][0] == doctest::Approx(std::max(0.5, t)).epsilon(1e-12));
    }
    // the right-continuous reading lags by at most one step
    double sup = 0.0;
    for (int s = 0; s <= 640; ++s) {
        const double t = s / 640.0;
        sup = std::max(sup, std::abs(sol.eval_rc(t)[0] - std::max(0.5, t)));
    }
    CHECK(sup <= 1.0 / 64 + 1e-12);
    CHECK(sup >= 0.5 / 64);
}

TEST_CASE("catching_up: inactive constraint leaves the state still") {
    auto g = TimeGrid::uniform(0.0, 1.0, 32);
    BVSolution sol = catching_up(fixed_ball(), {0.0, 0.0}, g);
    for (const auto& xv : sol.x.values) {
        CHECK(xv[0] == 0.0);
        CHECK(xv[1] == 0.0);
    }
    for (const auto& d : sol.density.cell_values) CHECK(norm2(d) == 0.0);
    CHECK(sol.nu.atoms.empty());
}

TEST_CASE("catching_up: a set jump becomes an atom of nu") {
    auto g = TimeGrid::uniform(0.0, 1.0, 10);  // 0.5 is a node
    BVSolution sol = catching_up(jumping_interval(), {0.5}, g);
    REQUIRE(sol.nu.atoms.size() == 1);
    CHECK(g.node(sol.nu.atoms[0].node) == 0.5);
    CHECK(sol.nu.atoms[0].mass == 1.0);
    CHECK(sol.atom_density[0][0] == doctest::Approx(1.5));
    for (size_t i = 0; i < g.nodes().size(); ++i) {
        const double t = g.node(static_cast<int>(i));
        CHECK(sol.x.values[i][0] == doctest::Approx(t < 0.5 ? 0.5 : 2.0));
    }
    // the jump cell carries no absolutely continuous density
    CHECK(norm2(sol.density.at_cell(4)) == 0.0);
    CHECK(sol.jump_cell[4]);

    // jump instants must be grid nodes
    auto bad = TimeGrid::uniform(0.0, 1.0, 7);
    CHECK_THROWS_AS(catching_up(jumping_interval(), {0.5}, bad), structural_error);
}

TEST_CASE("differential-measure consistency: increments equal the nu-integral of the density") {
    auto g = TimeGrid::uniform(0.0, 1.0, 20);
    BVSolution sol = catching_up(jumping_interval(), {0.5}, g);
    for (int j = 1; j <= g.cells(); ++j) {
        Vec integral = zeros(1);
        for (int k = 0; k < j; ++k)
            integral = axpy(integral, sol.nu.cell_mass(k), sol.density.at_cell(k));
        for (size_t a = 0; a < sol.nu.atoms.size(); ++a)
            if (sol.nu.atoms[a].node <= j)
                integral = axpy(integral, sol.nu.atoms[a].mass, sol.atom_density[a]);
        CHECK(integral[0] == doctest::Approx(sol.x.values[static_cast<size_t>(j)][0] -
                                             sol.x.values[0][0])
                                 .epsilon(1e-12));
    }
}

TEST_CASE("check_differential_measure") {
    auto g = TimeGrid::uniform(0.0, 1.0, 64);
    SUBCASE("constant interior solution passes vacuously") {
        BVSolution sol = catching_up(fixed_ball(), {0.2, -0.1}, g);
        Report rep = check_differential_measure(fixed_ball(), sol, 1e-9);
        CHECK(rep.pass);
        CHECK(rep.residual == 0.0);
    }
    SUBCASE("catching-up output passes: the projection inequality is exact") {
        BVSolution sol = catching_up(sliding_tube(), {0.5}, g);
        Report rep = check_differential_measure(sliding_tube(), sol, 1e-10);
        CHECK(rep.pass);
    }
    SUBCASE("sign-flipped densities fail") {
        BVSolution sol = flip_active_densities(catching_up(sliding_tube(), {0.5}, g));
        Report rep = check_differential_measure(sliding_tube(), sol, 1e-3);
        CHECK_FALSE(rep.pass);
        CHECK(rep.residual > 0.5);
    }
    SUBCASE("jump atoms are tested against the post-jump set") {
        BVSolution sol = catching_up(jumping_interval(), {0.5}, TimeGrid::uniform(0, 1, 10));
        CHECK(check_differential_measure(jumping_interval(), sol, 1e-10).pass);
        BVSolution bad = flip_active_densities(sol);
        CHECK_FALSE(check_differential_measure(jumping_interval(), bad, 1e-3).pass);
    }
}

TEST_CASE("generate_test_selections") {
    auto g = TimeGrid::uniform(0.0, 1.0, 32);
    SUBCASE("tube anchors project to the moving bounds") {
        auto sels = generate_test_selections(sliding_tube(), 12, g, 5);
        REQUIRE(sels.size() >= 12);
        // the two box corners give the extreme continuous selections t and t+1
        bool has_lower = false, has_upper = false;
        for (const auto& y : sels) {
            bool lower = true, upper = true;
            for (size_t i = 0; i < g.nodes().size(); ++i) {
                const double t = g.node(static_cast<int>(i));
                lower = lower && std::abs(y.values[i][0] - t) < 1e-9;
                upper = upper && std::abs(y.values[i][0] - (t + 1.0)) < 1e-9;
            }
            has_lower = has_lower || lower;
            has_upper = has_upper || upper;
        }
        CHECK(has_lower);
        CHECK(has_upper);
    }
    SUBCASE("interior anchors of a fixed ball give constant curves") {
        auto sels = generate_test_selections(fixed_ball(), 8, g, 5);
        REQUIRE(!sels.empty());
        for (const auto& y : sels)
            for (size_t i = 0; i + 1 < y.values.size(); ++i)
                CHECK(norm2(sub(y.values[i + 1], y.values[i])) < 1e-9);
    }
    SUBCASE("all selections are feasible at the nodes") {
        auto C = jumping_interval();
        auto g10 = TimeGrid::uniform(0.0, 1.0, 10);
        for (const auto& y : generate_test_selections(C, 16, g10, 5))
            for (size_t i = 0; i < g10.nodes().size(); ++i)
                CHECK(C.contains(g10.node(static_cast<int>(i)), y.values[i], 1e-6));
    }
}

TEST_CASE("check_integral_solution") {
    auto g = TimeGrid::uniform(0.0, 1.0, 64);
    auto C = sliding_tube();
    BVSolution sol = catching_up(C, {0.5}, g);
    auto sels = generate_test_selections(C, 16, g, 5);
    SUBCASE("catching-up output passes") {
        Report rep = check_integral_solution(C, sol, sels, 1e-10);
        CHECK(rep.pass);
    }
    SUBCASE("a constant interior solution is neutral for every selection") {
        BVSolution still = catching_up(fixed_ball(), {0.1, 0.2}, g);
        auto ball_sels = generate_test_selections(fixed_ball(), 8, g, 5);
        Report rep = check_integral_solution(fixed_ball(), still, ball_sels, 1e-12);
        CHECK(rep.pass);
        CHECK(rep.lhs == 0.0);
    }
    SUBCASE("sign-corrupted density drives the integral negative") {
        Report rep = check_integral_solution(C, flip_active_densities(sol), sels, 1e-3);
        CHECK_FALSE(rep.pass);
        CHECK(rep.lhs < -0.1);
    }
}

TEST_CASE("equivalence_report: both checkers agree") {
    auto g = TimeGrid::uniform(0.0, 1.0, 64);
    SUBCASE("healthy catching-up output: pass/pass") {
        auto C = sliding_tube();
        Report rep = equivalence_report(C, catching_up(C, {0.5}, g));
        CHECK(rep.pass);
        CHECK(rep.lhs == 1.0);
        CHECK(rep.rhs == 1.0);
    }
    SUBCASE("corrupted density: fail/fail") {
        auto C = sliding_tube();
        Report rep = equivalence_report(C, flip_active_densities(catching_up(C, {0.5}, g)));
        CHECK(rep.pass);
        CHECK(rep.lhs == 0.0);
        CHECK(rep.rhs == 0.0);
    }
    SUBCASE("with a jump: pass/pass") {
        auto C = jumping_interval();
        auto g10 = TimeGrid::uniform(0.0, 1.0, 40);
        Report rep = equivalence_report(C, catching_up(C, {0.5}, g10));
        CHECK(rep.pass);
        CHECK(rep.lhs == 1.0);
    }
    SUBCASE("mismatched explicit tolerances are inconclusive, not violations") {
        auto C = sliding_tube();
        EquivalenceTolerances tols;
        tols.dm_override = 1e-12;
        tols.integral_override = 10.0;
        BVSolution sol = catching_up(C, {0.5}, g);
        // slightly perturb the density so the strict checker fails
        BVSolution fuzz = sol;
        for (auto& cell : fuzz.density.cell_values)
            if (norm2(cell) > 1e-9) cell[0] += 1e-6;
        Report rep = equivalence_report(C, fuzz, tols);
        if (!rep.pass) CHECK(rep.notes.find("inconclusive") != std::string::npos);
    }
}

TEST_CASE("monotone tolerance: passing solutions keep passing at larger tolerances") {
    auto g = TimeGrid::uniform(0.0, 1.0, 32);
    auto C = sliding_tube();
    BVSolution sol = catching_up(C, {0.5}, g);
    double prev_tol = 1e-10;
    for (double tol : {1e-10, 1e-6, 1e-2, 1.0}) {
        REQUIRE(tol >= prev_tol);
        CHECK(check_differential_measure(C, sol, tol).pass);
        prev_tol = tol;
    }
}

TEST_CASE("hausdorff_lipschitz_estimate") {
    auto g = TimeGrid::uniform(0.0, 1.0, 50);
    CHECK(hausdorff_lipschitz_estimate(sliding_tube(), g) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hausdorff_lipschitz_estimate(fixed_ball(), g) == doctest::Approx(0.0));
    json grow = {{"kind", "ball"}, {"center", {"0"}}, {"radius", "1 + t/2"}};
    CHECK(hausdorff_lipschitz_estimate(moving_set_from_json(grow), g) ==
          doctest::Approx(0.5).epsilon(1e-9));
    // jump cells are skipped rather than polluting the estimate
    auto gj = TimeGrid::uniform(0.0, 1.0, 10);
    CHECK(hausdorff_lipschitz_estimate(jumping_interval(), gj) == doctest::Approx(0.0));
}

TEST_CASE("non-uniform grids carry jump atoms at their exact instants") {
    // cluster nodes near the jump; 0.5 itself must be a node
    std::vector<double> nodes{0.0, 0.2, 0.35, 0.45, 0.48, 0.5, 0.52, 0.6, 0.8, 1.0};
    auto g = TimeGrid::from_nodes(nodes);
    auto C = jumping_interval();
    BVSolution sol = catching_up(C, {0.5}, g);
    REQUIRE(sol.nu.atoms.size() == 1);
    CHECK(g.node(sol.nu.atoms[0].node) == 0.5);
    CHECK(check_differential_measure(C, sol, 1e-10).pass);
    Report eq = equivalence_report(C, sol);
    CHECK(eq.pass);
    CHECK(eq.lhs == 1.0);
}

TEST_CASE("catching-up convergence: error halves with the step") {
    auto C = sliding_tube();
    std::vector<double> errs;
    for (int N : {128, 256, 512, 1024, 2048}) {
        auto g = TimeGrid::uniform(0.0, 1.0, N);
        BVSolution sol = catching_up(C, {0.5}, g);
        double sup = 0.0;
        for (int s = 0; s <= 10 * N; ++s) {
            const double t = static_cast<double>(s) / (10 * N);
            sup = std::max(sup, std::abs(sol.eval_rc(t)[0] - std::max(0.5, t)));
        }
        errs.push_back(sup);
    }
    for (size_t i = 0; i + 1 < errs.size(); ++i) {
        const double ratio = errs[i] / errs[i + 1];
        CHECK(ratio >= 1.5);
        CHECK(ratio <= 3.0);
    }
}
