#include "hmlab/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "hmlab/linsolve.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

namespace {

// Curvature source A(u)(grad u, grad u) per node of one side.
std::vector<double> curvature_source(const CoupledField& u, Side s, const Manifold& n) {
    const SplitGrid& g = u.grid();
    const int k = u.components(), nd = g.dim();
    const std::vector<double> grad = discrete_gradient(u, s);
    std::vector<double> f(u.raw(s).size(), 0.0);
    const auto& nodes = g.side_nodes(s);
    par_for(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t i) {
        const std::int64_t id = nodes[static_cast<size_t>(i)];
        const Vec p = u.value(s, id);
        Vec acc(k);
        for (int d = 0; d < nd; ++d) {
            const Vec row = gradient_row(g, grad, k, id, d);
            acc += n.second_form(p, row, row);
        }
        const size_t base = static_cast<size_t>(id) * k;
        for (int c = 0; c < k; ++c) f[base + c] = acc[c];
    });
    return f;
}

// Index maps for the coupled backward-Euler system: unknowns are the plus
// interior values, the minus interior values, and the plus traces at Gamma
// (the minus trace is the affine image under the linearized Phi+).
struct CoupledLayout {
    std::vector<std::int64_t> slot_plus, slot_minus, slot_gamma;
    std::int64_t n_plus = 0, n_minus = 0, n_gamma = 0;
    int k = 0;

    CoupledLayout(const SplitGrid& g, int comps) : k(comps) {
        slot_plus.assign(static_cast<size_t>(g.num_nodes()), -1);
        slot_minus.assign(static_cast<size_t>(g.num_nodes()), -1);
        slot_gamma.assign(static_cast<size_t>(g.num_nodes()), -1);
        for (std::int64_t id : g.interior(Side::Plus)) slot_plus[static_cast<size_t>(id)] = n_plus++;
        for (std::int64_t id : g.interior(Side::Minus))
            slot_minus[static_cast<size_t>(id)] = n_minus++;
        for (std::int64_t id : g.gamma_nodes()) slot_gamma[static_cast<size_t>(id)] = n_gamma++;
    }
    std::int64_t size() const { return (n_plus + n_minus + n_gamma) * k; }
    std::int64_t plus_base() const { return 0; }
    std::int64_t minus_base() const { return n_plus * k; }
    std::int64_t gamma_base() const { return (n_plus + n_minus) * k; }
};

}  // namespace

void semi_implicit_step(FlowState& state, const AdmissibleProblem& p, double dt,
                        double cg_tol) {
    const SplitGrid& g = *p.grid;
    CoupledField& u = state.field;
    const int k = u.components();
    const CoupledLayout lay(g, k);

    const Manifold& nplus = *p.target_plus.ambient;
    const Manifold& nminus = *p.target_minus.ambient;
    const InterfaceMap& phi = *p.interface;

    // frozen linearization of the matching constraint at the current traces
    const auto& gammas = g.gamma_nodes();
    std::vector<Mat> jac(gammas.size());
    std::vector<Vec> affine(gammas.size());  // Phi(m) - J m
    for (size_t i = 0; i < gammas.size(); ++i) {
        const Vec m = u.trace_plus(gammas[i]);
        Mat j(k, k);
        for (int c = 0; c < k; ++c) {
            Vec e(k);
            e[c] = 1.0;
            const Vec col = phi.tubular_jacobian(m, e);
            for (int r = 0; r < k; ++r) j(r, c) = col[r];
        }
        jac[i] = j;
        affine[i] = phi.tubular_forward(m) - j.apply(m);
    }

    const std::vector<double> f_plus = curvature_source(u, Side::Plus, nplus);
    const std::vector<double> f_minus = curvature_source(u, Side::Minus, nminus);

    // scratch side arrays for operator application
    std::vector<double> ap(u.raw(Side::Plus).size()), am(u.raw(Side::Minus).size());
    std::vector<double> gp, gm;

    auto scatter = [&](const std::vector<double>& z, bool with_affine) {
        std::fill(ap.begin(), ap.end(), 0.0);
        std::fill(am.begin(), am.end(), 0.0);
        for (std::int64_t id : g.interior(Side::Plus)) {
            const std::int64_t s = lay.slot_plus[static_cast<size_t>(id)];
            for (int c = 0; c < k; ++c)
                ap[static_cast<size_t>(id) * k + c] = z[lay.plus_base() + s * k + c];
        }
        for (std::int64_t id : g.interior(Side::Minus)) {
            const std::int64_t s = lay.slot_minus[static_cast<size_t>(id)];
            for (int c = 0; c < k; ++c)
                am[static_cast<size_t>(id) * k + c] = z[lay.minus_base() + s * k + c];
        }
        for (size_t i = 0; i < gammas.size(); ++i) {
            const std::int64_t id = gammas[i];
            Vec zg(k);
            for (int c = 0; c < k; ++c) zg[c] = z[lay.gamma_base() + static_cast<std::int64_t>(i) * k + c];
            const Vec lm = jac[i].apply(zg) + (with_affine ? affine[i] : Vec(k));
            for (int c = 0; c < k; ++c) {
                ap[static_cast<size_t>(id) * k + c] = zg[c];
                am[static_cast<size_t>(id) * k + c] = lm[c];
            }
        }
        if (with_affine) {
            // Dirichlet data on the outer boundary
            for (std::int64_t id : g.sigma_nodes(Side::Plus)) {
                const Vec v = p.g_plus(g.position(id));
                for (int c = 0; c < k; ++c) ap[static_cast<size_t>(id) * k + c] = v[c];
            }
            for (std::int64_t id : g.sigma_nodes(Side::Minus)) {
                const Vec v = p.g_minus(g.position(id));
                for (int c = 0; c < k; ++c) am[static_cast<size_t>(id) * k + c] = v[c];
            }
            for (std::int64_t id : g.sigma_edge_nodes()) {
                const Vec x = g.position(id);
                const Vec vp = p.g_plus(x), vm = p.g_minus(x);
                for (int c = 0; c < k; ++c) {
                    ap[static_cast<size_t>(id) * k + c] = vp[c];
                    am[static_cast<size_t>(id) * k + c] = vm[c];
                }
            }
        }
    };

    auto gather = [&](std::vector<double>& out, const std::vector<double>& z,
                      bool with_mass) {
        for (std::int64_t id : g.interior(Side::Plus)) {
            const std::int64_t s = lay.slot_plus[static_cast<size_t>(id)];
            const double mu = g.weight(id, Side::Plus) / dt;
            for (int c = 0; c < k; ++c) {
                double v = gp[static_cast<size_t>(id) * k + c];
                if (with_mass) v += mu * z[lay.plus_base() + s * k + c];
                out[lay.plus_base() + s * k + c] = v;
            }
        }
        for (std::int64_t id : g.interior(Side::Minus)) {
            const std::int64_t s = lay.slot_minus[static_cast<size_t>(id)];
            const double mu = g.weight(id, Side::Minus) / dt;
            for (int c = 0; c < k; ++c) {
                double v = gm[static_cast<size_t>(id) * k + c];
                if (with_mass) v += mu * z[lay.minus_base() + s * k + c];
                out[lay.minus_base() + s * k + c] = v;
            }
        }
        for (size_t i = 0; i < gammas.size(); ++i) {
            const std::int64_t id = gammas[i];
            const double mup = g.weight(id, Side::Plus) / dt;
            const double mum = g.weight(id, Side::Minus) / dt;
            Vec vp(k), vm(k);
            for (int c = 0; c < k; ++c) {
                vp[c] = gp[static_cast<size_t>(id) * k + c];
                vm[c] = gm[static_cast<size_t>(id) * k + c];
            }
            Vec row = vp + jac[i].transposed().apply(vm);
            if (with_mass) {
                Vec zg(k);
                for (int c = 0; c < k; ++c)
                    zg[c] = z[lay.gamma_base() + static_cast<std::int64_t>(i) * k + c];
                row += mup * zg + jac[i].transposed().apply(mum * jac[i].apply(zg));
            }
            for (int c = 0; c < k; ++c)
                out[lay.gamma_base() + static_cast<std::int64_t>(i) * k + c] = row[c];
        }
    };

    auto apply = [&](const std::vector<double>& z, std::vector<double>& out) {
        scatter(z, false);
        edge_energy_gradient_raw(g, Side::Plus, k, ap, gp);
        edge_energy_gradient_raw(g, Side::Minus, k, am, gm);
        gather(out, z, true);
    };

    // rhs: mass * u_old + source - stiffness applied to the affine part
    std::vector<double> b(static_cast<size_t>(lay.size()), 0.0);
    {
        std::vector<double> zero(static_cast<size_t>(lay.size()), 0.0);
        scatter(zero, true);
        edge_energy_gradient_raw(g, Side::Plus, k, ap, gp);
        edge_energy_gradient_raw(g, Side::Minus, k, am, gm);
        gather(b, zero, false);
        for (auto& v : b) v = -v;
        for (std::int64_t id : g.interior(Side::Plus)) {
            const std::int64_t s = lay.slot_plus[static_cast<size_t>(id)];
            const double mu = g.weight(id, Side::Plus);
            for (int c = 0; c < k; ++c)
                b[lay.plus_base() + s * k + c] +=
                    mu * (u.raw(Side::Plus)[static_cast<size_t>(id) * k + c] / dt +
                          f_plus[static_cast<size_t>(id) * k + c]);
        }
        for (std::int64_t id : g.interior(Side::Minus)) {
            const std::int64_t s = lay.slot_minus[static_cast<size_t>(id)];
            const double mu = g.weight(id, Side::Minus);
            for (int c = 0; c < k; ++c)
                b[lay.minus_base() + s * k + c] +=
                    mu * (u.raw(Side::Minus)[static_cast<size_t>(id) * k + c] / dt +
                          f_minus[static_cast<size_t>(id) * k + c]);
        }
        for (size_t i = 0; i < gammas.size(); ++i) {
            const std::int64_t id = gammas[i];
            const double mup = g.weight(id, Side::Plus);
            const double mum = g.weight(id, Side::Minus);
            const Vec m = u.trace_plus(id);
            Vec fp(k), fm(k);
            for (int c = 0; c < k; ++c) {
                fp[c] = f_plus[static_cast<size_t>(id) * k + c];
                fm[c] = f_minus[static_cast<size_t>(id) * k + c];
            }
            Vec row = mup * ((1.0 / dt) * m + fp) +
                      jac[i].transposed().apply(mum * ((1.0 / dt) * jac[i].apply(m) + fm));
            for (int c = 0; c < k; ++c)
                b[lay.gamma_base() + static_cast<std::int64_t>(i) * k + c] += row[c];
        }
    }

    // warm start from the current values
    std::vector<double> z(static_cast<size_t>(lay.size()), 0.0);
    for (std::int64_t id : g.interior(Side::Plus)) {
        const std::int64_t s = lay.slot_plus[static_cast<size_t>(id)];
        for (int c = 0; c < k; ++c)
            z[lay.plus_base() + s * k + c] = u.raw(Side::Plus)[static_cast<size_t>(id) * k + c];
    }
    for (std::int64_t id : g.interior(Side::Minus)) {
        const std::int64_t s = lay.slot_minus[static_cast<size_t>(id)];
        for (int c = 0; c < k; ++c)
            z[lay.minus_base() + s * k + c] =
                u.raw(Side::Minus)[static_cast<size_t>(id) * k + c];
    }
    for (size_t i = 0; i < gammas.size(); ++i) {
        const Vec m = u.trace_plus(gammas[i]);
        for (int c = 0; c < k; ++c)
            z[lay.gamma_base() + static_cast<std::int64_t>(i) * k + c] = m[c];
    }

    CgResult cg = conjugate_gradient(apply, b, z,
                                     4 * static_cast<int>(lay.size()) + 400, cg_tol);
    if (!cg.converged && cg.residual > 1e-7)
        throw LinearSolveFailure("semi-implicit step CG stalled, residual " +
                                 std::to_string(cg.residual));

    // save previous, write back, project
    state.previous = std::make_unique<CoupledField>(u);
    try {
        for (std::int64_t id : g.interior(Side::Plus)) {
            const std::int64_t s = lay.slot_plus[static_cast<size_t>(id)];
            Vec v(k);
            for (int c = 0; c < k; ++c) v[c] = z[lay.plus_base() + s * k + c];
            if (nplus.distance(v) >= nplus.tubular_radius())
                throw ProjectionFailure("semi_implicit_step: dt too large for projection");
            u.set_value(Side::Plus, id, nplus.project(v));
        }
        for (std::int64_t id : g.interior(Side::Minus)) {
            const std::int64_t s = lay.slot_minus[static_cast<size_t>(id)];
            Vec v(k);
            for (int c = 0; c < k; ++c) v[c] = z[lay.minus_base() + s * k + c];
            if (nminus.distance(v) >= nminus.tubular_radius())
                throw ProjectionFailure("semi_implicit_step: dt too large for projection");
            u.set_value(Side::Minus, id, nminus.project(v));
        }
        for (size_t i = 0; i < gammas.size(); ++i) {
            const std::int64_t id = gammas[i];
            Vec v(k);
            for (int c = 0; c < k; ++c)
                v[c] = z[lay.gamma_base() + static_cast<std::int64_t>(i) * k + c];
            if (p.target_plus.inner->distance(v) >= p.target_plus.inner->tubular_radius())
                throw ProjectionFailure("semi_implicit_step: trace left the tubular neighborhood");
            const Vec m = p.target_plus.inner->project(v);
            u.set_value(Side::Plus, id, m);
            u.set_value(Side::Minus, id, phi.forward(m));
        }
    } catch (const OutsideTubularNeighborhood& e) {
        throw ProjectionFailure(std::string("semi_implicit_step: ") + e.what());
    }
    state.t += dt;
}

double initial_flux_compatibility(const CoupledField& u0, const AdmissibleProblem& p) {
    const TraceField dp = normal_derivative_at_interface(u0, Side::Plus);
    const TraceField dm = normal_derivative_at_interface(u0, Side::Minus);
    double worst = 0;
    for (size_t i = 0; i < dp.nodes.size(); ++i) {
        const std::int64_t id = dp.nodes[i];
        const Vec m = u0.trace_plus(id);
        const Vec am = u0.trace_minus(id);
        const Vec tp = p.target_plus.inner->tangent_project(m, dp.values[i]);
        const Vec tm = p.target_minus.inner->tangent_project(am, dm.values[i]);
        worst = std::max(worst, (tm - p.interface->derivative(m, tp)).norm());
    }
    return worst;
}

FlowResult run_flow(const AdmissibleProblem& p, const CoupledField& u0,
                    const FlowOptions& opts) {
    const SplitGrid& g = *p.grid;
    const double dt = opts.dt_factor * g.h() * g.h();
    const int steps = std::max(1, static_cast<int>(std::ceil(opts.t_end / dt - 1e-12)));

    FlowResult res{FlowState(u0), {}, {}, 0.0, false};
    res.initial_flux_compat = initial_flux_compatibility(u0, p);
    res.flux_compat_flagged = res.initial_flux_compat > 10 * g.h();
    res.trajectory.dt = dt;
    res.trajectory.times.push_back(0.0);
    res.trajectory.frames.push_back(u0);

    double e = edge_energy(res.state.field);
    res.ledger.push(0.0, e);

    for (int step = 1; step <= steps; ++step) {
        semi_implicit_step(res.state, p, dt, opts.cg_tol);
        const CoupledField& unew = res.state.field;
        const CoupledField& uold = *res.state.previous;
        // dissipation integral of |du/dt|^2 over this step
        double diss = 0;
        for (Side s : {Side::Plus, Side::Minus}) {
            for (std::int64_t id : g.side_nodes(s)) {
                const double mu = g.weight(id, s);
                if (mu == 0) continue;
                const Vec d = unew.value(s, id) - uold.value(s, id);
                diss += mu * d.norm2() / dt;
            }
        }
        const double e_new = edge_energy(unew);
        if (step % opts.ledger_stride == 0 || step == steps)
            res.ledger.push(res.state.t, e_new, diss, e - e_new - diss);
        e = e_new;
        if (step % opts.frame_stride == 0 || step == steps) {
            res.trajectory.times.push_back(res.state.t);
            res.trajectory.frames.push_back(unew);
        }
    }
    return res;
}

EnergyInequalityReport energy_inequality_check(const EnergyLedger& ledger, double c_const) {
    EnergyInequalityReport rep;
    const size_t n = ledger.size();
    if (n < 2) return rep;
    // cumulative dissipation
    std::vector<double> cum(n, 0.0);
    for (size_t i = 1; i < n; ++i) cum[i] = cum[i - 1] + ledger.dissipation[i];
    for (size_t i = 1; i < n; ++i)
        rep.max_step_increase =
            std::max(rep.max_step_increase, ledger.energy[i] - ledger.energy[i - 1]);

    const size_t stride = std::max<size_t>(1, n / 64);
    rep.min_slack = 1e300;
    for (size_t i = 0; i < n; i += stride)
        for (size_t j = i + 1; j < n; j += stride) {
            const double s = ledger.t[i], t = ledger.t[j];
            double weighted = 0;
            for (size_t m = i + 1; m <= j; ++m)
                weighted += std::exp(c_const * (t - ledger.t[m])) * ledger.dissipation[m];
            const double slack = std::exp(c_const * (t - s)) * ledger.energy[i] -
                                 ledger.energy[j] - 0.25 * weighted;
            rep.min_slack = std::min(rep.min_slack, slack);
            const double ident =
                std::fabs(ledger.energy[i] - ledger.energy[j] - (cum[j] - cum[i]));
            rep.max_identity_residual = std::max(rep.max_identity_residual, ident);
        }
    if (rep.min_slack == 1e300) rep.min_slack = 0;
    return rep;
}

// ---- Picard chart solver ----------------------------------------------

namespace {

std::shared_ptr<Chart> make_picard_chart(const AdmissibleProblem& p, const CoupledField& u0,
                                         double scale) {
    // center: nearest M+ point to the mean of all values, the minus side
    // pulled back to N+ through Phi-
    const SplitGrid& g = *p.grid;
    Vec mean(u0.components());
    double count = 0;
    for (std::int64_t id : g.side_nodes(Side::Plus)) {
        mean += u0.value(Side::Plus, id);
        count += 1;
    }
    for (std::int64_t id : g.side_nodes(Side::Minus)) {
        mean += p.interface->inverse(u0.value(Side::Minus, id));
        count += 1;
    }
    mean *= 1.0 / count;
    const Vec center = p.target_plus.inner->project(mean);
    auto circ = std::dynamic_pointer_cast<const Circle>(p.target_plus.ambient);
    if (circ && p.target_plus.inner == p.target_plus.ambient)
        return std::make_shared<AngleChart>(circ, center);
    return std::make_shared<GraphChart>(p.target_plus.ambient, p.target_plus.inner, center,
                                        scale);
}

}  // namespace

double picard_proxy_norm(const SplitGrid& g, int dim_u, const std::vector<double>& times,
                         const std::vector<std::vector<double>>& slices, double alpha,
                         int samples, unsigned seed) {
    const std::int64_t nn = g.num_nodes();
    const size_t nt = slices.size();
    double sup = 0, dsup = 0;
    // sup norm and first-difference sup norm
    for (size_t t = 0; t < nt; ++t) {
        const auto& a = slices[t];
        for (std::int64_t id = 0; id < nn; ++id) {
            for (int c = 0; c < dim_u; ++c)
                sup = std::max(sup, std::fabs(a[static_cast<size_t>(id) * dim_u + c]));
            for (int d = 0; d < g.dim(); ++d) {
                const std::int64_t nb = g.neighbor(id, d, +1);
                if (nb < 0) continue;
                for (int c = 0; c < dim_u; ++c)
                    dsup = std::max(dsup,
                                    std::fabs(a[static_cast<size_t>(nb) * dim_u + c] -
                                              a[static_cast<size_t>(id) * dim_u + c]) /
                                        g.h());
            }
        }
    }
    // sampled Hoelder quotients
    std::mt19937 rng(seed);
    std::uniform_int_distribution<std::int64_t> node_dist(0, nn - 1);
    std::uniform_int_distribution<size_t> time_dist(0, nt - 1);
    std::uniform_int_distribution<int> axis_dist(0, g.dim() - 1);
    double hq = 0;
    auto dgrad = [&](const std::vector<double>& a, std::int64_t id, int d, int c) {
        const std::int64_t nb = g.neighbor(id, d, +1);
        if (nb < 0) return 0.0;
        return (a[static_cast<size_t>(nb) * dim_u + c] -
                a[static_cast<size_t>(id) * dim_u + c]) /
               g.h();
    };
    for (int it = 0; it < samples; ++it) {
        const std::int64_t a = node_dist(rng), b = node_dist(rng);
        const size_t t1 = time_dist(rng), t2 = time_dist(rng);
        const int d = axis_dist(rng);
        const double dist = (g.position(a) - g.position(b)).norm();
        if (dist >= g.h()) {
            for (int c = 0; c < dim_u; ++c) {
                const double q = std::fabs(dgrad(slices[t1], a, d, c) -
                                           dgrad(slices[t1], b, d, c)) /
                                 std::pow(dist, alpha);
                hq = std::max(hq, q);
            }
        }
        const double tdist = std::fabs(times[t1] - times[t2]);
        if (tdist > 0) {
            for (int c = 0; c < dim_u; ++c) {
                const double q1 = std::fabs(dgrad(slices[t1], a, d, c) -
                                            dgrad(slices[t2], a, d, c)) /
                                  std::pow(tdist, alpha / 2);
                const double q2 =
                    std::fabs(slices[t1][static_cast<size_t>(a) * dim_u + c] -
                              slices[t2][static_cast<size_t>(a) * dim_u + c]) /
                    std::pow(tdist, (1 + alpha) / 2);
                hq = std::max({hq, q1, q2});
            }
        }
    }
    return std::max({sup, dsup, hq});
}

PicardResult picard_chart_solve(const AdmissibleProblem& p, const CoupledField& u0,
                                const PicardConfig& cfg) {
    if (!p.interface->is_isometry())
        throw ConfigError("picard_chart_solve requires an isometric interface map");
    if (cfg.alpha <= 0 || cfg.alpha >= 1 || cfg.theta_target >= 1)
        throw ConfigError("picard config: need 0 < alpha < 1 and theta_target < 1");
    const SplitGrid& g = *p.grid;
    PicardResult res;
    res.chart = make_picard_chart(p, u0, cfg.chart_scale);
    const Chart& chart = *res.chart;
    const int du = chart.coord_dim();
    const int kk = chart.k();

    // chart representation of u0, single-valued across Gamma
    std::vector<double> u0c(static_cast<size_t>(g.num_nodes()) * du, 0.0);
    auto from_ambient = [&](Side s, const Vec& q) {
        return chart.from_manifold(s == Side::Plus ? q : p.interface->inverse(q));
    };
    auto check_inside = [&](const Vec& uc) {
        double n1 = 0, n2 = 0;
        for (int c = 0; c < kk; ++c) n1 += uc[c] * uc[c];
        for (int c = kk; c < du; ++c) n2 += uc[c] * uc[c];
        if (n1 >= 1.0 || n2 >= 1.0)
            throw ChartExit("iterate left the coordinate chart; shrink the horizon");
    };
    try {
        for (std::int64_t id = 0; id < g.num_nodes(); ++id) {
            const Side s = g.on_side(id, Side::Plus) ? Side::Plus : Side::Minus;
            Vec uc = from_ambient(s, u0.value(s, id));
            if (g.node_class(id) == NodeClass::Gamma ||
                g.node_class(id) == NodeClass::SigmaEdge)
                for (int c = kk; c < du; ++c) uc[c] = 0.0;  // exact M slice
            check_inside(uc);
            for (int c = 0; c < du; ++c) u0c[static_cast<size_t>(id) * du + c] = uc[c];
        }
    } catch (const ChartFailure& e) {
        throw ChartExit(std::string("initial data does not fit one chart: ") + e.what());
    }

    const double dt = cfg.dt_factor * g.h() * g.h();
    const int steps = std::max(1, static_cast<int>(std::ceil(cfg.horizon / dt - 1e-12)));
    res.times.resize(static_cast<size_t>(steps) + 1);
    for (int s = 0; s <= steps; ++s) res.times[static_cast<size_t>(s)] = s * dt;

    // ---- linear transmission heat solve machinery ----
    // U1 block: single valued on the whole lattice, natural flux matching at
    // Gamma (the two half-cell forms add). U2 block: zero Dirichlet at Gamma,
    // solved per side.
    std::vector<std::int64_t> free1;  // interior+, interior-, Gamma
    std::vector<std::int64_t> slot1(static_cast<size_t>(g.num_nodes()), -1);
    for (std::int64_t id = 0; id < g.num_nodes(); ++id) {
        const NodeClass c = g.node_class(id);
        if (c == NodeClass::InteriorPlus || c == NodeClass::InteriorMinus ||
            c == NodeClass::Gamma) {
            slot1[static_cast<size_t>(id)] = static_cast<std::int64_t>(free1.size());
            free1.push_back(id);
        }
    }
    std::vector<std::vector<std::int64_t>> free2(2);
    std::vector<std::vector<std::int64_t>> slot2(2);
    for (Side s : {Side::Plus, Side::Minus}) {
        auto& f = free2[s == Side::Plus ? 0 : 1];
        auto& sl = slot2[s == Side::Plus ? 0 : 1];
        sl.assign(static_cast<size_t>(g.num_nodes()), -1);
        for (std::int64_t id : g.interior(s)) {
            sl[static_cast<size_t>(id)] = static_cast<std::int64_t>(f.size());
            f.push_back(id);
        }
    }

    const double inv_h2 = 1.0 / (g.h() * g.h());
    auto mu_tot = [&](std::int64_t id) {
        return g.weight(id, Side::Plus) + g.weight(id, Side::Minus);
    };

    // scalar heat solve for the U1 block: (mu/dt) v + K v = rhs
    auto solve_u1 = [&](std::vector<double>& vals /*full lattice, one comp*/,
                        const std::vector<double>& prev, const std::vector<double>& load) {
        const std::int64_t nf = static_cast<std::int64_t>(free1.size());
        auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
            par_for(nf, [&](std::int64_t i) {
                const std::int64_t id = free1[static_cast<size_t>(i)];
                double acc = mu_tot(id) / dt * x[static_cast<size_t>(i)];
                for (Side s : {Side::Plus, Side::Minus}) {
                    if (!g.on_side(id, s)) continue;
                    for (int d = 0; d < g.dim(); ++d)
                        for (int dir : {+1, -1}) {
                            const std::int64_t nb = g.neighbor(id, d, dir);
                            const double w = dir > 0
                                                 ? edge_weight(g, s, id, d)
                                                 : (nb >= 0 ? edge_weight(g, s, nb, d) : 0.0);
                            if (w == 0.0) continue;
                            const std::int64_t ns = slot1[static_cast<size_t>(nb)];
                            const double xn = ns >= 0 ? x[static_cast<size_t>(ns)] : 0.0;
                            acc += w * inv_h2 * (x[static_cast<size_t>(i)] - xn);
                        }
                }
                out[static_cast<size_t>(i)] = acc;
            });
        };
        std::vector<double> b(static_cast<size_t>(nf), 0.0);
        par_for(nf, [&](std::int64_t i) {
            const std::int64_t id = free1[static_cast<size_t>(i)];
            double acc = mu_tot(id) / dt * prev[static_cast<size_t>(id)] +
                         load[static_cast<size_t>(i)];
            for (Side s : {Side::Plus, Side::Minus}) {
                if (!g.on_side(id, s)) continue;
                for (int d = 0; d < g.dim(); ++d)
                    for (int dir : {+1, -1}) {
                        const std::int64_t nb = g.neighbor(id, d, dir);
                        const double w = dir > 0 ? edge_weight(g, s, id, d)
                                                 : (nb >= 0 ? edge_weight(g, s, nb, d) : 0.0);
                        if (w == 0.0) continue;
                        if (slot1[static_cast<size_t>(nb)] >= 0) continue;
                        acc += w * inv_h2 * vals[static_cast<size_t>(nb)];  // Dirichlet
                    }
            }
            b[static_cast<size_t>(i)] = acc;
        });
        std::vector<double> x(static_cast<size_t>(nf));
        for (std::int64_t i = 0; i < nf; ++i)
            x[static_cast<size_t>(i)] = vals[static_cast<size_t>(free1[static_cast<size_t>(i)])];
        CgResult cg = conjugate_gradient(apply, b, x, 4 * static_cast<int>(nf) + 400,
                                         cfg.cg_tol);
        if (!cg.converged && cg.residual > 1e-7)
            throw LinearSolveFailure("picard U1 solve stalled");
        for (std::int64_t i = 0; i < nf; ++i)
            vals[static_cast<size_t>(free1[static_cast<size_t>(i)])] = x[static_cast<size_t>(i)];
    };

    auto solve_u2 = [&](Side s, std::vector<double>& vals, const std::vector<double>& prev,
                        const std::vector<double>& load_full) {
        const auto& f = free2[s == Side::Plus ? 0 : 1];
        const auto& sl = slot2[s == Side::Plus ? 0 : 1];
        const std::int64_t nf = static_cast<std::int64_t>(f.size());
        auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
            par_for(nf, [&](std::int64_t i) {
                const std::int64_t id = f[static_cast<size_t>(i)];
                double acc = g.weight(id, s) / dt * x[static_cast<size_t>(i)];
                for (int d = 0; d < g.dim(); ++d)
                    for (int dir : {+1, -1}) {
                        const std::int64_t nb = g.neighbor(id, d, dir);
                        const double w = dir > 0 ? edge_weight(g, s, id, d)
                                                 : (nb >= 0 ? edge_weight(g, s, nb, d) : 0.0);
                        if (w == 0.0) continue;
                        const std::int64_t ns = sl[static_cast<size_t>(nb)];
                        const double xn = ns >= 0 ? x[static_cast<size_t>(ns)] : 0.0;
                        acc += w * inv_h2 * (x[static_cast<size_t>(i)] - xn);
                    }
                out[static_cast<size_t>(i)] = acc;
            });
        };
        std::vector<double> b(static_cast<size_t>(nf), 0.0);
        par_for(nf, [&](std::int64_t i) {
            const std::int64_t id = f[static_cast<size_t>(i)];
            double acc = g.weight(id, s) / dt * prev[static_cast<size_t>(id)] +
                         g.weight(id, s) * load_full[static_cast<size_t>(id)];
            for (int d = 0; d < g.dim(); ++d)
                for (int dir : {+1, -1}) {
                    const std::int64_t nb = g.neighbor(id, d, dir);
                    const double w = dir > 0 ? edge_weight(g, s, id, d)
                                             : (nb >= 0 ? edge_weight(g, s, nb, d) : 0.0);
                    if (w == 0.0) continue;
                    if (sl[static_cast<size_t>(nb)] >= 0) continue;
                    // Gamma rows are zero-Dirichlet for U2; Sigma rows carry U0
                    const NodeClass c = g.node_class(nb);
                    const double dval =
                        (c == NodeClass::Gamma || c == NodeClass::SigmaEdge)
                            ? 0.0
                            : vals[static_cast<size_t>(nb)];
                    acc += w * inv_h2 * dval;
                }
            b[static_cast<size_t>(i)] = acc;
        });
        std::vector<double> x(static_cast<size_t>(nf));
        for (std::int64_t i = 0; i < nf; ++i)
            x[static_cast<size_t>(i)] = vals[static_cast<size_t>(f[static_cast<size_t>(i)])];
        CgResult cg = conjugate_gradient(apply, b, x, 4 * static_cast<int>(nf) + 400,
                                         cfg.cg_tol);
        if (!cg.converged && cg.residual > 1e-7)
            throw LinearSolveFailure("picard U2 solve stalled");
        for (std::int64_t i = 0; i < nf; ++i)
            vals[static_cast<size_t>(f[static_cast<size_t>(i)])] = x[static_cast<size_t>(i)];
    };

    // chart Christoffel source of one trajectory at a slice, per component;
    // the shared chart metric serves both sides (isometric interface).
    auto source_for = [&](const std::vector<double>& slice, std::int64_t id, Side s,
                          Christoffel& gamma_buf, bool& has_gamma) {
        Vec uc(du);
        for (int c = 0; c < du; ++c) uc[c] = slice[static_cast<size_t>(id) * du + c];
        if (!has_gamma) {
            gamma_buf = chart.christoffel(uc);
            has_gamma = true;
        }
        // gradient of each chart component along this side
        Vec src(du);
        for (int d = 0; d < g.dim(); ++d) {
            Vec grad_d(du);
            {
                // one-sided / centered derivative on the single-valued array
                const auto mi = g.multi_index(id);
                const int npa = g.nodes_per_axis();
                const int mid = npa / 2;
                int lo = 0, hi = npa - 1;
                if (d == g.split_axis()) {
                    if (s == Side::Plus) lo = mid;
                    else hi = mid;
                }
                const double h = g.h();
                auto at = [&](std::int64_t node, int c) {
                    return slice[static_cast<size_t>(node) * du + c];
                };
                if (mi[d] > lo && mi[d] < hi) {
                    const std::int64_t up = g.neighbor(id, d, +1), dn = g.neighbor(id, d, -1);
                    for (int c = 0; c < du; ++c) grad_d[c] = (at(up, c) - at(dn, c)) / (2 * h);
                } else if (mi[d] == lo && hi - lo >= 2) {
                    const std::int64_t n1 = g.neighbor(id, d, +1);
                    const std::int64_t n2 = g.neighbor(n1, d, +1);
                    for (int c = 0; c < du; ++c)
                        grad_d[c] = (-3 * at(id, c) + 4 * at(n1, c) - at(n2, c)) / (2 * h);
                } else if (mi[d] == hi && hi - lo >= 2) {
                    const std::int64_t n1 = g.neighbor(id, d, -1);
                    const std::int64_t n2 = g.neighbor(n1, d, -1);
                    for (int c = 0; c < du; ++c)
                        grad_d[c] = (3 * at(id, c) - 4 * at(n1, c) + at(n2, c)) / (2 * h);
                }
            }
            for (int kc = 0; kc < du; ++kc)
                for (int i2 = 0; i2 < du; ++i2)
                    for (int j2 = 0; j2 < du; ++j2)
                        src[kc] += gamma_buf(kc, i2, j2) * grad_d[i2] * grad_d[j2];
        }
        return src;
    };

    // run one linear sweep: V = T(U); source == nullptr means source-free
    auto sweep = [&](const std::vector<std::vector<double>>* usrc) {
        std::vector<std::vector<double>> v(static_cast<size_t>(steps) + 1, u0c);
        std::vector<double> comp_vals(static_cast<size_t>(g.num_nodes()));
        std::vector<double> comp_prev(static_cast<size_t>(g.num_nodes()));
        std::vector<double> load1(free1.size());
        std::vector<double> load_full(static_cast<size_t>(g.num_nodes()));
        for (int stp = 1; stp <= steps; ++stp) {
            auto& cur = v[static_cast<size_t>(stp)];
            cur = v[static_cast<size_t>(stp) - 1];
            // per-node source from the frozen trajectory at this time level
            std::vector<Vec> source(static_cast<size_t>(g.num_nodes()), Vec(du));
            if (usrc) {
                const auto& uslice = (*usrc)[static_cast<size_t>(stp)];
                bool metric_failure = false;
                par_for(g.num_nodes(), [&](std::int64_t id) {
                    try {
                        const NodeClass c = g.node_class(id);
                        Christoffel gamma_buf;
                        bool has = false;
                        if (c == NodeClass::Gamma) {
                            // both half-cells contribute their own side's source
                            const Vec sp = source_for(uslice, id, Side::Plus, gamma_buf, has);
                            const Vec sm = source_for(uslice, id, Side::Minus, gamma_buf, has);
                            const double wp = g.weight(id, Side::Plus),
                                         wm = g.weight(id, Side::Minus);
                            source[static_cast<size_t>(id)] =
                                (1.0 / (wp + wm)) * (wp * sp + wm * sm);
                        } else if (c == NodeClass::InteriorPlus) {
                            source[static_cast<size_t>(id)] =
                                source_for(uslice, id, Side::Plus, gamma_buf, has);
                        } else if (c == NodeClass::InteriorMinus) {
                            source[static_cast<size_t>(id)] =
                                source_for(uslice, id, Side::Minus, gamma_buf, has);
                        }
                    } catch (const std::exception&) {
                        metric_failure = true;
                    }
                });
                if (metric_failure)
                    throw ChartExit("chart metric became singular along the iterate");
            }
            // U1 components
            for (int c = 0; c < kk; ++c) {
                for (std::int64_t id = 0; id < g.num_nodes(); ++id) {
                    comp_vals[static_cast<size_t>(id)] = cur[static_cast<size_t>(id) * du + c];
                    comp_prev[static_cast<size_t>(id)] =
                        v[static_cast<size_t>(stp) - 1][static_cast<size_t>(id) * du + c];
                }
                for (size_t i = 0; i < free1.size(); ++i)
                    load1[i] = mu_tot(free1[i]) * source[static_cast<size_t>(free1[i])][c];
                solve_u1(comp_vals, comp_prev, load1);
                for (std::int64_t id = 0; id < g.num_nodes(); ++id)
                    cur[static_cast<size_t>(id) * du + c] = comp_vals[static_cast<size_t>(id)];
            }
            // U2 components per side
            for (int c = kk; c < du; ++c) {
                for (Side s : {Side::Plus, Side::Minus}) {
                    for (std::int64_t id = 0; id < g.num_nodes(); ++id) {
                        comp_vals[static_cast<size_t>(id)] =
                            cur[static_cast<size_t>(id) * du + c];
                        comp_prev[static_cast<size_t>(id)] =
                            v[static_cast<size_t>(stp) - 1][static_cast<size_t>(id) * du + c];
                        load_full[static_cast<size_t>(id)] =
                            source[static_cast<size_t>(id)].size() > 0
                                ? source[static_cast<size_t>(id)][c]
                                : 0.0;
                    }
                    solve_u2(s, comp_vals, comp_prev, load_full);
                    for (std::int64_t id : g.interior(s))
                        cur[static_cast<size_t>(id) * du + c] =
                            comp_vals[static_cast<size_t>(id)];
                }
                for (std::int64_t id : g.gamma_nodes())
                    cur[static_cast<size_t>(id) * du + c] = 0.0;
            }
            // chart containment
            for (std::int64_t id = 0; id < g.num_nodes(); ++id) {
                Vec uc(du);
                for (int c = 0; c < du; ++c) uc[c] = cur[static_cast<size_t>(id) * du + c];
                check_inside(uc);
            }
        }
        return v;
    };

    // first iterate: source-free heat evolution of U0
    res.slices = sweep(nullptr);
    // ratios below this floor are round-off of the linear solves, not
    // contraction data
    const double noise_floor = std::max(
        cfg.cauchy_tol, 1e3 * cfg.cg_tol *
                            (1 + picard_proxy_norm(g, du, res.times, res.slices, cfg.alpha,
                                                   cfg.hoelder_samples, cfg.seed)));
    double prev_dist = -1;
    for (int it = 0; it < cfg.max_sweeps; ++it) {
        std::vector<std::vector<double>> next = sweep(&res.slices);
        // proxy-norm distance between consecutive iterates
        std::vector<std::vector<double>> diff(next.size());
        for (size_t t = 0; t < next.size(); ++t) {
            diff[t].resize(next[t].size());
            for (size_t i = 0; i < next[t].size(); ++i)
                diff[t][i] = next[t][i] - res.slices[t][i];
        }
        const double dist = picard_proxy_norm(g, du, res.times, diff, cfg.alpha,
                                              cfg.hoelder_samples, cfg.seed);
        res.slices = std::move(next);
        res.sweep_distances.push_back(dist);
        if (prev_dist > noise_floor && dist > noise_floor) {
            const double ratio = dist / prev_dist;
            res.contraction_ratios.push_back(ratio);
            if (ratio >= 1.0)
                throw NoContraction("successive-iterate ratio " + std::to_string(ratio) +
                                    " >= 1; halve the horizon");
        }
        res.sweeps = it + 1;
        if (dist <= std::max(cfg.cauchy_tol, noise_floor)) break;
        prev_dist = dist;
    }
    res.contracted = !res.contraction_ratios.empty();
    for (double rr : res.contraction_ratios)
        res.contracted = res.contracted && rr <= cfg.theta_target;

    // discrete nonlinear residual of the limit trajectory
    {
        double worst = 0;
        for (int stp = 1; stp <= steps; ++stp) {
            const auto& cur = res.slices[static_cast<size_t>(stp)];
            const auto& prv = res.slices[static_cast<size_t>(stp) - 1];
            for (std::int64_t id = 0; id < g.num_nodes(); ++id) {
                const NodeClass c = g.node_class(id);
                if (c == NodeClass::SigmaPlus || c == NodeClass::SigmaMinus ||
                    c == NodeClass::SigmaEdge)
                    continue;
                Christoffel gamma_buf;
                bool has = false;
                Vec src(du);
                if (c == NodeClass::Gamma) {
                    const Vec sp = source_for(cur, id, Side::Plus, gamma_buf, has);
                    const Vec sm = source_for(cur, id, Side::Minus, gamma_buf, has);
                    const double wp = g.weight(id, Side::Plus), wm = g.weight(id, Side::Minus);
                    src = (1.0 / (wp + wm)) * (wp * sp + wm * sm);
                } else {
                    src = source_for(cur, id, c == NodeClass::InteriorPlus ? Side::Plus
                                                                           : Side::Minus,
                                     gamma_buf, has);
                }
                // mass * (du/dt - source) + stiffness
                for (int comp = 0; comp < du; ++comp) {
                    double stiff = 0;
                    for (Side s : {Side::Plus, Side::Minus}) {
                        if (!g.on_side(id, s)) continue;
                        for (int d = 0; d < g.dim(); ++d)
                            for (int dir : {+1, -1}) {
                                const std::int64_t nb = g.neighbor(id, d, dir);
                                const double w =
                                    dir > 0 ? edge_weight(g, s, id, d)
                                            : (nb >= 0 ? edge_weight(g, s, nb, d) : 0.0);
                                if (w == 0.0) continue;
                                stiff += w * inv_h2 *
                                         (cur[static_cast<size_t>(id) * du + comp] -
                                          cur[static_cast<size_t>(nb) * du + comp]);
                            }
                    }
                    const double mu = mu_tot(id);
                    const double r = mu * ((cur[static_cast<size_t>(id) * du + comp] -
                                            prv[static_cast<size_t>(id) * du + comp]) /
                                               dt -
                                           src[comp]) +
                                     stiff;
                    worst = std::max(worst, std::fabs(r) / mu);
                }
            }
        }
        res.final_residual = worst;
    }
    return res;
}

CoupledField picard_slice_to_field(const AdmissibleProblem& p, const PicardResult& r,
                                   size_t slice) {
    const SplitGrid& g = *p.grid;
    const Chart& chart = *r.chart;
    const int du = chart.coord_dim();
    CoupledField f(g, p.target_plus.ambient->ambient_dim());
    const auto& a = r.slices.at(slice);
    for (Side s : {Side::Plus, Side::Minus}) {
        for (std::int64_t id : g.side_nodes(s)) {
            Vec uc(du);
            for (int c = 0; c < du; ++c) uc[c] = a[static_cast<size_t>(id) * du + c];
            Vec q = chart.to_manifold(uc);
            if (s == Side::Minus) q = p.interface->tubular_forward(q);
            f.set_value(s, id, q);
        }
    }
    return f;
}

}  // namespace hmlab
