#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "hmlab/calculus.hpp"
#include "hmlab/io.hpp"
#include "hmlab/parallel.hpp"
#include "hmlab/serial_ref.hpp"

using namespace hmlab;

namespace {

CoupledField linear_field(const SplitGrid& g, const Vec& a, const std::vector<Vec>& b) {
    CoupledField f(g, a.size());
    for (Side s : {Side::Plus, Side::Minus})
        for (std::int64_t id : g.side_nodes(s)) {
            const Vec x = g.position(id);
            Vec v = a;
            for (int d = 0; d < g.dim(); ++d) v += x[d] * b[static_cast<size_t>(d)];
            f.set_value(s, id, v);
        }
    return f;
}

CoupledField circle_sweep(const SplitGrid& g) {  // u = (cos x1, sin x1)
    CoupledField f(g, 2);
    for (Side s : {Side::Plus, Side::Minus})
        for (std::int64_t id : g.side_nodes(s)) {
            const Vec x = g.position(id);
            f.set_value(s, id, Vec{std::cos(x[0]), std::sin(x[0])});
        }
    return f;
}

}  // namespace

TEST_CASE("grid classification partitions the nodes; gamma is a grid plane") {
    for (int dim : {1, 2, 3}) {
        SplitGrid g(dim, 0.25, 1.0);
        std::int64_t count = 0;
        count += g.interior(Side::Plus).size() + g.interior(Side::Minus).size();
        count += g.gamma_nodes().size() + g.sigma_nodes(Side::Plus).size() +
                 g.sigma_nodes(Side::Minus).size() + g.sigma_edge_nodes().size();
        CHECK(count == g.num_nodes());
        for (std::int64_t id : g.gamma_nodes()) {
            CHECK(g.position(id)[g.split_axis()] == 0.0);
            // full one-sided stencils into both sides
            CHECK(g.neighbor(g.neighbor(id, g.split_axis(), +1), g.split_axis(), +1) >= 0);
            CHECK(g.neighbor(g.neighbor(id, g.split_axis(), -1), g.split_axis(), -1) >= 0);
        }
        if (dim == 1) CHECK(g.sigma_edge_nodes().empty());
    }
    CHECK_THROWS_AS(SplitGrid(2, 0.3, 1.0), ConfigError);  // h must divide the extent
}

TEST_CASE("discrete gradient") {
    SplitGrid g(2, 1.0 / 8, 1.0);

    SUBCASE("constant fields have zero gradient") {
        CoupledField f = linear_field(g, Vec{0.4, -0.2}, {Vec{0.0, 0.0}, Vec{0.0, 0.0}});
        for (Side s : {Side::Plus, Side::Minus}) {
            const auto grad = discrete_gradient(f, s);
            for (std::int64_t id : g.side_nodes(s))
                for (int d = 0; d < 2; ++d)
                    CHECK(gradient_row(g, grad, 2, id, d).norm() < 1e-13);
        }
    }
    SUBCASE("affine fields are differentiated exactly") {
        const std::vector<Vec> b{Vec{1.5, -0.5}, Vec{0.25, 2.0}};
        CoupledField f = linear_field(g, Vec{0.1, 0.2}, b);
        for (Side s : {Side::Plus, Side::Minus}) {
            const auto grad = discrete_gradient(f, s);
            for (std::int64_t id : g.side_nodes(s))
                for (int d = 0; d < 2; ++d)
                    CHECK((gradient_row(g, grad, 2, id, d) - b[static_cast<size_t>(d)]).norm() <
                          1e-12);
        }
    }
    SUBCASE("unit-speed circle sweep has |grad u|^2 = 1 up to C h^2") {
        for (double h : {1.0 / 8, 1.0 / 16}) {
            SplitGrid gh(2, h, 1.0);
            CoupledField f = circle_sweep(gh);
            double worst = 0;
            for (Side s : {Side::Plus, Side::Minus}) {
                const auto grad = discrete_gradient(f, s);
                for (std::int64_t id : gh.side_nodes(s)) {
                    double g2 = 0;
                    for (int d = 0; d < 2; ++d)
                        g2 += gradient_row(gh, grad, 2, id, d).norm2();
                    worst = std::max(worst, std::fabs(g2 - 1.0));
                }
            }
            CHECK(worst <= 2.0 * h * h);
        }
    }
}

TEST_CASE("discrete energy") {
    SUBCASE("constant maps have zero energy") {
        SplitGrid g(2, 1.0 / 8, 1.0);
        CoupledField f = linear_field(g, Vec{1.0, 0.0}, {Vec{0.0, 0.0}, Vec{0.0, 0.0}});
        CHECK(discrete_energy(f) == 0.0);
        CHECK(edge_energy(f) == 0.0);
    }
    SUBCASE("geodesic sweep on the split square has energy 2") {
        for (double h : {1.0 / 8, 1.0 / 16}) {
            SplitGrid g(2, h, 1.0);
            CoupledField f = circle_sweep(g);
            CHECK(std::fabs(discrete_energy(f) - 2.0) <= 4.0 * h * h);
            CHECK(std::fabs(edge_energy(f) - 2.0) <= 4.0 * h * h);
        }
    }
    SUBCASE("1-D matching profile reproduces the closed-form energy (pi/6)^2") {
        // theta0 = 0 at Sigma+, theta1 = pi/2 at Sigma-, beta = pi/6:
        // slopes +-pi/6, energy (pi/6)^2 = 0.27415567780803773
        const double t0 = 0.0, t1 = M_PI / 2, beta = M_PI / 6;
        const double mid = 0.5 * (t0 + t1 - beta), slope = 0.5 * (t0 - t1 + beta);
        for (double h : {1.0 / 64, 1.0 / 128}) {
            SplitGrid g(1, h, 1.0);
            CoupledField f(g, 2);
            for (Side s : {Side::Plus, Side::Minus})
                for (std::int64_t id : g.side_nodes(s)) {
                    const double x = g.position(id)[0];
                    const double th = (s == Side::Plus ? mid : mid + beta) + slope * x;
                    f.set_value(s, id, Vec{std::cos(th), std::sin(th)});
                }
            const double expect = (M_PI / 6) * (M_PI / 6);
            CHECK(std::fabs(discrete_energy(f) - expect) <= 1.0 * h * h);
            CHECK(std::fabs(edge_energy(f) - expect) <= 1.0 * h * h);
        }
    }
    SUBCASE("energy is invariant under relabeling the sides") {
        SplitGrid g(2, 1.0 / 8, 1.0);
        CoupledField f(g, 2), mirrored(g, 2);
        for (Side s : {Side::Plus, Side::Minus})
            for (std::int64_t id : g.side_nodes(s)) {
                const Vec x = g.position(id);
                f.set_value(s, id, Vec{std::sin(x[0] + 2 * x[1]), std::cos(x[0] - x[1])});
            }
        // mirror x2 -> -x2 and swap the sides
        const int mid = g.nodes_per_axis() / 2;
        for (Side s : {Side::Plus, Side::Minus})
            for (std::int64_t id : g.side_nodes(s)) {
                const auto mi = g.multi_index(id);
                const std::int64_t mirror = g.node_id(mi[0], 2 * mid - mi[1], 0);
                mirrored.set_value(s == Side::Plus ? Side::Minus : Side::Plus, mirror,
                                   f.value(s, id));
            }
        CHECK(edge_energy_side(f, Side::Plus) ==
              doctest::Approx(edge_energy_side(mirrored, Side::Minus)).epsilon(1e-14));
        CHECK(discrete_energy(f) == doctest::Approx(discrete_energy(mirrored)).epsilon(1e-14));
    }
    SUBCASE("refinement converges at second order on a smooth analytic field") {
        // 2-D circle-valued field; the reference energy comes from a fine
        // midpoint quadrature of the closed-form |grad theta|^2
        auto th_x = [](double x, double y) {
            return 0.3 + 0.15 * M_PI * std::cos(M_PI * x) * std::cos(0.5 * M_PI * y);
        };
        auto th_y = [](double x, double y) {
            return 0.2 - 0.075 * M_PI * std::sin(M_PI * x) * std::sin(0.5 * M_PI * y);
        };
        double exact = 0;
        const int m = 1500;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const double x = -1 + 2.0 * (i + 0.5) / m, y = -1 + 2.0 * (j + 0.5) / m;
                exact += th_x(x, y) * th_x(x, y) + th_y(x, y) * th_y(x, y);
            }
        exact *= 0.5 * 4.0 / (double(m) * m);

        std::vector<double> errs, errs_edge;
        for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) {
            SplitGrid g(2, h, 1.0);
            CoupledField f(g, 2);
            for (Side s : {Side::Plus, Side::Minus})
                for (std::int64_t id : g.side_nodes(s)) {
                    const Vec x = g.position(id);
                    const double th = 0.3 * x[0] + 0.2 * x[1] +
                                      0.15 * std::sin(M_PI * x[0]) *
                                          std::cos(0.5 * M_PI * x[1]);
                    f.set_value(s, id, Vec{std::cos(th), std::sin(th)});
                }
            errs.push_back(std::fabs(discrete_energy(f) - exact));
            errs_edge.push_back(std::fabs(edge_energy(f) - exact));
        }
        for (size_t i = 0; i + 1 < errs.size(); ++i) {
            CHECK(std::log2(errs[i] / errs[i + 1]) >= 1.9);
            CHECK(std::log2(errs_edge[i] / errs_edge[i + 1]) >= 1.9);
        }
    }
}

TEST_CASE("normal derivative at the interface") {
    SplitGrid g(2, 1.0 / 8, 1.0);
    SUBCASE("linear in x_n with equal slopes: exact") {
        CoupledField f(g, 1);
        const double s0 = 0.8;
        for (Side s : {Side::Plus, Side::Minus})
            for (std::int64_t id : g.side_nodes(s))
                f.set_value(s, id, Vec{s0 * g.position(id)[1] + 0.3});
        for (Side s : {Side::Plus, Side::Minus}) {
            const TraceField t = normal_derivative_at_interface(f, s);
            for (const Vec& v : t.values) CHECK(std::fabs(v[0] - s0) < 1e-12);
        }
    }
    SUBCASE("constants have zero normal derivative") {
        CoupledField f(g, 1);
        for (Side s : {Side::Plus, Side::Minus})
            for (std::int64_t id : g.side_nodes(s)) f.set_value(s, id, Vec{2.5});
        for (Side s : {Side::Plus, Side::Minus}) {
            const TraceField t = normal_derivative_at_interface(f, s);
            for (const Vec& v : t.values) CHECK(std::fabs(v[0]) < 1e-13);
        }
    }
    SUBCASE("f = x1 x_n has trace x1 (one-sided second order is exact here)") {
        CoupledField f(g, 1);
        for (Side s : {Side::Plus, Side::Minus})
            for (std::int64_t id : g.side_nodes(s)) {
                const Vec x = g.position(id);
                f.set_value(s, id, Vec{x[0] * x[1]});
            }
        for (Side s : {Side::Plus, Side::Minus}) {
            const TraceField t = normal_derivative_at_interface(f, s);
            for (size_t i = 0; i < t.values.size(); ++i)
                CHECK(std::fabs(t.values[i][0] - t.points[i][0]) <= 1e-12);
        }
    }
}

TEST_CASE("ball restriction") {
    SplitGrid g(2, 1.0 / 16, 1.0);
    SUBCASE("r below the grid scale is degenerate and flagged") {
        CoupledField f(g, 2);
        const BallRestriction b = ball_restriction(f, Vec{0.0, 0.0}, 0.5 / 16);
        CHECK(b.degenerate);
    }
    SUBCASE("balls must stay inside the domain") {
        CoupledField f(g, 2);
        CHECK_THROWS_AS(ball_restriction(f, Vec{0.9, 0.0}, 0.5), BallExceedsDomain);
    }
    SUBCASE("constant fields have constant sphere traces") {
        CoupledField f = linear_field(g, Vec{0.3, 0.6}, {Vec{0.0, 0.0}, Vec{0.0, 0.0}});
        const BallRestriction b = ball_restriction(f, Vec{0.0, 0.0}, 0.5);
        for (const Vec& v : b.sphere_plus.values) CHECK((v - Vec{0.3, 0.6}).norm() < 1e-13);
        for (const Vec& v : b.sphere_minus.values) CHECK((v - Vec{0.3, 0.6}).norm() < 1e-13);
    }
    SUBCASE("linear fields restrict exactly (multilinear interpolation)") {
        const std::vector<Vec> slope{Vec{1.0, -2.0}, Vec{0.5, 0.75}};
        CoupledField f = linear_field(g, Vec{0.1, 0.2}, slope);
        const BallRestriction b = ball_restriction(f, Vec{0.125, 0.0}, 0.5);
        for (size_t i = 0; i < b.sphere_plus.points.size(); ++i) {
            const Vec y = b.sphere_plus.points[i];
            Vec expect = Vec{0.1, 0.2} + y[0] * slope[0] + y[1] * slope[1];
            CHECK((b.sphere_plus.values[i] - expect).norm() <= 1e-12);
        }
    }
}

TEST_CASE("summation by parts at second order") {
    // scalar fields vanishing on the outer boundary of one side
    std::vector<double> resid;
    for (double h : {1.0 / 8, 1.0 / 16}) {
        SplitGrid g(2, h, 1.0);
        CoupledField f(g, 1), w(g, 1);
        for (std::int64_t id : g.side_nodes(Side::Plus)) {
            const Vec x = g.position(id);
            // vanishes on the boundary of the upper half square
            const double fy = std::sin(M_PI * x[0]) * std::sin(M_PI * x[1]);
            const double wy = std::sin(2 * M_PI * x[0]) * x[1] * (1 - x[1]);
            f.set_value(Side::Plus, id, Vec{fy});
            w.set_value(Side::Plus, id, Vec{wy});
        }
        // <Delta f, w> + <grad f, grad w> with the node-gradient quadrature
        const auto r = edge_energy_gradient(f, Side::Plus);  // = -mu * Delta f
        const auto gf = discrete_gradient(f, Side::Plus);
        const auto gw = discrete_gradient(w, Side::Plus);
        double lap_term = 0, grad_term = 0;
        for (std::int64_t id : g.side_nodes(Side::Plus)) {
            lap_term += -r[static_cast<size_t>(id)] * w.value(Side::Plus, id)[0];
            double dd = 0;
            for (int d = 0; d < 2; ++d)
                dd += dot(gradient_row(g, gf, 1, id, d), gradient_row(g, gw, 1, id, d));
            grad_term += g.weight(id, Side::Plus) * dd;
        }
        resid.push_back(std::fabs(lap_term + grad_term));
    }
    CHECK(resid[1] <= resid[0] / 3.0);  // consistent with O(h^2) decay
    CHECK(resid[0] <= 1.0);
}

TEST_CASE("parallel kernels match the serial reference") {
    SplitGrid g(3, 1.0 / 8, 1.0);
    CoupledField f(g, 3);
    for (Side s : {Side::Plus, Side::Minus})
        for (std::int64_t id : g.side_nodes(s)) {
            const Vec x = g.position(id);
            f.set_value(s, id, Vec{std::sin(x[0] + 2 * x[1]), std::cos(x[1] - x[2]),
                                   std::sin(x[2]) * std::cos(x[0])});
        }
    for (int threads : {1, 4}) {
        set_num_threads(threads);
        for (Side s : {Side::Plus, Side::Minus}) {
            const double e_par = edge_energy_side(f, s);
            const double e_ref = serial_ref::edge_energy_side(f, s);
            CHECK(std::fabs(e_par - e_ref) <= 1e-13 * (1 + std::fabs(e_ref)));

            const auto g_par = edge_energy_gradient(f, s);
            const auto g_ref = serial_ref::edge_energy_gradient(f, s);
            double worst = 0;
            for (size_t i = 0; i < g_par.size(); ++i)
                worst = std::max(worst, std::fabs(g_par[i] - g_ref[i]));
            CHECK(worst <= 1e-13);

            const auto d_par = discrete_gradient(f, s);
            const auto d_ref = serial_ref::discrete_gradient(f, s);
            for (size_t i = 0; i < d_par.size(); ++i) CHECK(d_par[i] == d_ref[i]);
        }
    }
    // ordered reductions are thread-count independent bitwise
    set_num_threads(1);
    const double e1 = edge_energy(f);
    set_num_threads(3);
    const double e3 = edge_energy(f);
    CHECK(e1 == e3);
    set_num_threads(1);
}

TEST_CASE("field CSV round trip") {
    SplitGrid g(2, 1.0 / 4, 1.0);
    CoupledField f(g, 2);
    std::mt19937 rng(9);
    std::normal_distribution<double> nd;
    for (Side s : {Side::Plus, Side::Minus})
        for (std::int64_t id : g.side_nodes(s)) f.set_value(s, id, Vec{nd(rng), nd(rng)});
    const std::string path = "grid_roundtrip_test.csv";
    write_field_csv(path, f);
    CoupledField f2(g, 2);
    read_field_csv(path, f2);
    for (Side s : {Side::Plus, Side::Minus})
        for (std::int64_t id : g.side_nodes(s))
            CHECK((f.value(s, id) - f2.value(s, id)).norm() == 0.0);
    std::remove(path.c_str());
}
