#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hmlab/oracle.hpp"
#include "hmlab/scenario.hpp"

using namespace hmlab;

namespace {

// polynomial corpus on the split square: all entries are multilinear or
// coordinate-harmonic, so the 5-point stencil annihilates them exactly
struct PolyPair {
    std::function<double(const Vec&)> tangential_plus, tangential_minus;
    std::function<double(const Vec&)> normal_plus, normal_minus;
    double p_scalar = 1.0;
};

LinearTransmissionProblem make_problem(const std::shared_ptr<SplitGrid>& grid,
                                       const PolyPair& pp) {
    LinearTransmissionProblem prob;
    prob.grid = grid;
    prob.k = 1;
    prob.m_n = 1;
    prob.coupling = Mat(1, 1);
    prob.coupling(0, 0) = pp.p_scalar;
    prob.boundary_plus = [pp](const Vec& x) {
        return Vec{pp.tangential_plus(x), pp.normal_plus(x)};
    };
    prob.boundary_minus = [pp](const Vec& x) {
        return Vec{pp.tangential_minus(x), pp.normal_minus(x)};
    };
    return prob;
}

double max_interior_error(const TransmissionSolution& sol, const PolyPair& pp) {
    const SplitGrid& g = *sol.grid;
    double worst = 0;
    for (Side s : {Side::Plus, Side::Minus}) {
        for (std::int64_t id : g.side_nodes(s)) {
            if (g.position(id).norm() >= 1.0 - 1e-12) continue;
            const Vec x = g.position(id);
            const Vec got = sol.at(s, id);
            const double want_t =
                s == Side::Plus ? pp.tangential_plus(x) : pp.tangential_minus(x);
            const double want_n = s == Side::Plus ? pp.normal_plus(x) : pp.normal_minus(x);
            worst = std::max(worst, std::fabs(got[0] - want_t));
            worst = std::max(worst, std::fabs(got[1] - want_n));
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("coupled harmonic solver reproduces the polynomial corpus") {
    auto grid = std::make_shared<SplitGrid>(2, 1.0 / 16, 1.0);

    SUBCASE("P = Id with equal fields x1 + x1 xn") {
        PolyPair pp;
        pp.p_scalar = 1.0;
        pp.tangential_plus = pp.tangential_minus = [](const Vec& x) {
            return x[0] + x[0] * x[1];
        };
        pp.normal_plus = pp.normal_minus = [](const Vec&) { return 0.0; };
        const TransmissionSolution sol = solve_coupled_harmonic(make_problem(grid, pp));
        CHECK(max_interior_error(sol, pp) <= 1e-9);
    }

    SUBCASE("P = 2 Id with the hand-built matched pair") {
        // v+ = x1 + 2 x1 xn, v- = 2 x1 + x1 xn: v- = 2 v+ and
        // dn v+ = 2 dn v- on Gamma by direct substitution
        PolyPair pp;
        pp.p_scalar = 2.0;
        pp.tangential_plus = [](const Vec& x) { return x[0] + 2 * x[0] * x[1]; };
        pp.tangential_minus = [](const Vec& x) { return 2 * x[0] + x[0] * x[1]; };
        pp.normal_plus = pp.normal_minus = [](const Vec&) { return 0.0; };
        const TransmissionSolution sol = solve_coupled_harmonic(make_problem(grid, pp));
        CHECK(max_interior_error(sol, pp) <= 1e-9);

        // trace conditions at the Gamma nodes of the ball
        const SplitGrid& g = *grid;
        const double h = g.h();
        for (std::int64_t id : g.gamma_nodes()) {
            if (g.position(id).norm() >= 1.0 - 1e-12) continue;
            const Vec vp = sol.at(Side::Plus, id), vm = sol.at(Side::Minus, id);
            CHECK(std::fabs(vm[0] - 2 * vp[0]) <= 1e-9);
            // one-sided second-order normal derivatives
            auto dn = [&](Side s, int dir) {
                const std::int64_t n1 = g.neighbor(id, g.split_axis(), dir);
                const std::int64_t n2 = g.neighbor(n1, g.split_axis(), dir);
                return dir *
                       (-3 * sol.at(s, id)[0] + 4 * sol.at(s, n1)[0] - sol.at(s, n2)[0]) /
                       (2 * h);
            };
            CHECK(std::fabs(dn(Side::Plus, +1) - 2 * dn(Side::Minus, -1)) <= 1e-8);
        }
    }

    SUBCASE("normal parts carry zero Dirichlet data on Gamma") {
        PolyPair pp;
        pp.p_scalar = 1.0;
        pp.tangential_plus = pp.tangential_minus = [](const Vec&) { return 0.0; };
        pp.normal_plus = [](const Vec& x) { return x[1]; };
        pp.normal_minus = [](const Vec& x) { return -3 * x[1]; };
        const TransmissionSolution sol = solve_coupled_harmonic(make_problem(grid, pp));
        CHECK(max_interior_error(sol, pp) <= 1e-9);
        for (std::int64_t id : grid->gamma_nodes()) {
            if (grid->position(id).norm() >= 1.0 - 1e-12) continue;
            CHECK(std::fabs(sol.at(Side::Plus, id)[1]) <= 1e-10);
            CHECK(std::fabs(sol.at(Side::Minus, id)[1]) <= 1e-10);
        }
    }

    SUBCASE("singular coupling matrices are rejected") {
        PolyPair pp;
        pp.p_scalar = 0.0;
        pp.tangential_plus = pp.tangential_minus = [](const Vec&) { return 0.0; };
        pp.normal_plus = pp.normal_minus = [](const Vec&) { return 0.0; };
        CHECK_THROWS_AS(solve_coupled_harmonic(make_problem(grid, pp)), SingularCoupling);
    }
}

TEST_CASE("reflection identities of the even extension") {
    auto grid = std::make_shared<SplitGrid>(2, 1.0 / 16, 1.0);

    SUBCASE("on the polynomial pair, both identities hold to round-off") {
        PolyPair pp;
        pp.p_scalar = 2.0;
        pp.tangential_plus = [](const Vec& x) { return x[0] + 2 * x[0] * x[1]; };
        pp.tangential_minus = [](const Vec& x) { return 2 * x[0] + x[0] * x[1]; };
        pp.normal_plus = pp.normal_minus = [](const Vec&) { return 0.0; };
        const TransmissionSolution sol = solve_coupled_harmonic(make_problem(grid, pp));
        const ReflectionReport rep = reflection_identities(sol);
        CHECK(rep.dirichlet_combination_on_gamma <= 1e-10);
        CHECK(rep.dirichlet_combination_interior <= 1e-8);
        // the plus combination v+ + P^t vtilde- carries the zero Neumann data
        CHECK(rep.plus_combination_is_neumann);
        CHECK(rep.neumann_residual_plus_comb <= 1e-8);
        CHECK(rep.neumann_residual_minus_comb > 1e-2);
        MESSAGE("neumann residuals: plus comb ", rep.neumann_residual_plus_comb,
                ", minus comb ", rep.neumann_residual_minus_comb);
    }

    SUBCASE("generic smooth data: identities at second order") {
        PolyPair pp;
        pp.p_scalar = 1.5;
        pp.tangential_plus = [](const Vec& x) {
            return std::sin(x[0]) * std::exp(x[1]);  // not discretely harmonic
        };
        pp.tangential_minus = [](const Vec& x) { return 1.5 * std::sin(x[0]) * std::exp(x[1]); };
        pp.normal_plus = pp.normal_minus = [](const Vec&) { return 0.0; };
        const TransmissionSolution sol = solve_coupled_harmonic(make_problem(grid, pp));
        const ReflectionReport rep = reflection_identities(sol);
        CHECK(rep.dirichlet_combination_on_gamma <= 1e-10);  // exact by construction
        CHECK(rep.dirichlet_combination_interior <= 1e-7);   // discrete harmonic residual
        CHECK(rep.plus_combination_is_neumann);
    }

    SUBCASE("orthogonal coupling: the two combinations have equal norms pointwise") {
        LinearTransmissionProblem prob;
        prob.grid = grid;
        prob.k = 2;
        prob.m_n = 0;
        const double ang = 0.7;
        prob.coupling = Mat(2, 2);
        prob.coupling(0, 0) = std::cos(ang);
        prob.coupling(0, 1) = -std::sin(ang);
        prob.coupling(1, 0) = std::sin(ang);
        prob.coupling(1, 1) = std::cos(ang);
        prob.boundary_plus = [](const Vec& x) {
            return Vec{x[0] * x[1], 0.5 * x[0] - 0.2 * x[1]};
        };
        prob.boundary_minus = [&prob](const Vec& x) {
            return prob.coupling.apply(Vec{x[0] * x[1], 0.5 * x[0] - 0.2 * x[1]});
        };
        const TransmissionSolution sol = solve_coupled_harmonic(prob);
        const Mat pt = prob.coupling.transposed();
        const int mid = grid->nodes_per_axis() / 2;
        for (std::int64_t id : grid->side_nodes(Side::Plus)) {
            const auto mi = grid->multi_index(id);
            const std::int64_t mirror = grid->node_id(mi[0], 2 * mid - mi[1], 0);
            Vec vp(2), vm(2);
            for (int c = 0; c < 2; ++c) {
                vp[c] = sol.plus[static_cast<size_t>(id) * 2 + c];
                vm[c] = sol.minus[static_cast<size_t>(mirror) * 2 + c];
            }
            const double a = (vm - prob.coupling.apply(vp)).norm();
            const double b = (pt.apply(vm) - vp).norm();
            CHECK(std::fabs(a - b) <= 1e-12);
        }
    }
}

TEST_CASE("transmission problems and solutions serialize to JSON") {
    auto grid = std::make_shared<SplitGrid>(2, 1.0 / 8, 1.0);
    PolyPair pp;
    pp.p_scalar = 2.0;
    pp.tangential_plus = [](const Vec& x) { return x[0] + 2 * x[0] * x[1]; };
    pp.tangential_minus = [](const Vec& x) { return 2 * x[0] + x[0] * x[1]; };
    pp.normal_plus = pp.normal_minus = [](const Vec&) { return 0.0; };
    const LinearTransmissionProblem prob = make_problem(grid, pp);
    const TransmissionSolution sol = solve_coupled_harmonic(prob);

    // problem round trip: the deserialized corpus solves to the same fields
    const LinearTransmissionProblem prob2 =
        transmission_problem_from_json(transmission_problem_to_json(prob));
    const TransmissionSolution sol2 = solve_coupled_harmonic(prob2);
    double worst = 0;
    for (size_t i = 0; i < sol.plus.size(); ++i)
        worst = std::max(worst, std::fabs(sol.plus[i] - sol2.plus[i]));
    CHECK(worst <= 1e-12);

    // solution round trip is exact
    const TransmissionSolution sol3 =
        transmission_solution_from_json(transmission_solution_to_json(sol));
    CHECK(sol3.plus == sol.plus);
    CHECK(sol3.minus == sol.minus);
    CHECK(sol3.coupling(0, 0) == sol.coupling(0, 0));
}

TEST_CASE("blow-up consistency") {
    SUBCASE("constant maps rescale to zero") {
        Scenario s;
        s.dim = 2;
        s.h = 1.0 / 16;
        s.target_kind = "circle";
        s.interface_kind = "rotation";
        s.beta = 0.3;
        s.boundary_form = "constant";
        s.theta_plus = 0.8;
        AdmissibleProblem p = build_problem(s);
        const CoupledField u = initialize_admissible(p);
        const BlowupReport rep =
            blowup_consistency_check(u, p, Vec{0.0, 0.0}, {0.5, 0.25});
        for (double e : rep.renormalized_energy) CHECK(e <= 1e-20);
        for (double m : rep.linear_match) CHECK(m == 0.0);
    }

    SUBCASE("scales below 4h are rejected") {
        Scenario s;
        s.dim = 2;
        s.h = 1.0 / 16;
        s.target_kind = "circle";
        s.boundary_form = "constant";
        AdmissibleProblem p = build_problem(s);
        const CoupledField u = initialize_admissible(p);
        CHECK_THROWS_AS(blowup_consistency_check(u, p, Vec{0.0, 0.0}, {0.1}),
                        ScaleBelowGrid);
    }

    SUBCASE("smooth 1-D minimizer: linearized residuals decay with the scale") {
        Scenario s;
        s.dim = 1;
        s.h = 1.0 / 64;
        s.target_kind = "circle";
        s.interface_kind = "rotation";
        s.beta = M_PI / 6;
        s.boundary_form = "angles";
        s.theta_plus = 0.0;
        s.theta_minus = M_PI / 2;
        AdmissibleProblem p = build_problem(s);
        MinimizeOptions opts;
        opts.gradient_tol = 1e-10;
        const MinimizeResult res = minimize(p, initialize_admissible(p), opts);

        const BlowupReport rep =
            blowup_consistency_check(res.field, p, Vec{0.0}, {0.4, 0.2, 0.1}, 8);
        MESSAGE("linear match: ", rep.linear_match[0], " ", rep.linear_match[1], " ",
                rep.linear_match[2]);
        MESSAGE("trace residual: ", rep.trace_residual[0], " ", rep.trace_residual[1], " ",
                rep.trace_residual[2]);
        // O(r) decay of the linearization error
        CHECK(rep.linear_match[1] <= 0.7 * rep.linear_match[0] + 1e-8);
        CHECK(rep.linear_match[2] <= 0.7 * rep.linear_match[1] + 1e-8);
        // the renormalized energy vanishes linearly for the smooth profile
        CHECK(rep.renormalized_energy[2] < rep.renormalized_energy[0]);
    }

    SUBCASE("hedgehog origin: scale invariance blocks the energy improvement") {
        Scenario s;
        s.dim = 3;
        s.h = 1.0 / 16;
        s.target_kind = "sphere-equator";
        s.interface_kind = "identity";
        s.boundary_form = "radial-projection";
        AdmissibleProblem p = build_problem(s);
        const CoupledField u = initialize_homogeneous(p);
        const BlowupReport rep =
            blowup_consistency_check(u, p, Vec{0.0, 0.0, 0.0}, {0.5, 0.25}, 6);
        REQUIRE(rep.decay_ratio.size() == 1);
        MESSAGE("hedgehog decay ratio = ", rep.decay_ratio[0]);
        CHECK(rep.decay_ratio[0] > 0.5);  // no energy improvement at the singularity
        CHECK(std::fabs(rep.decay_ratio[0] - 1.0) <= 0.2);
    }
}
