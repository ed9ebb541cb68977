#include "hmlab/elliptic.hpp"

#include <algorithm>
#include <cmath>

#include "hmlab/linsolve.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

namespace {

bool is_fixed_boundary(NodeClass c) {
    return c == NodeClass::SigmaPlus || c == NodeClass::SigmaMinus || c == NodeClass::SigmaEdge;
}

Vec projected_or_throw(const Manifold& m, const Vec& p, const char* what) {
    if (m.distance(p) >= m.tubular_radius())
        throw ProjectionFailure(std::string(what) + ": fill left the tubular neighborhood of " +
                                m.name());
    try {
        return m.project(p);
    } catch (const OutsideTubularNeighborhood&) {
        throw ProjectionFailure(std::string(what) + ": fill left the tubular neighborhood of " +
                                m.name());
    }
}

}  // namespace

double AdmissibleProblem::compatibility_residual() const {
    double worst = 0;
    for (std::int64_t id : grid->sigma_edge_nodes()) {
        const Vec x = grid->position(id);
        const Vec gp = g_plus(x), gm = g_minus(x);
        worst = std::max(worst, (gm - interface->tubular_forward(gp)).norm());
    }
    return worst;
}

double AdmissibleProblem::boundary_membership_residual() const {
    double worst = 0;
    for (std::int64_t id : grid->sigma_nodes(Side::Plus))
        worst = std::max(worst, target_plus.ambient->distance(g_plus(grid->position(id))));
    for (std::int64_t id : grid->sigma_nodes(Side::Minus))
        worst = std::max(worst, target_minus.ambient->distance(g_minus(grid->position(id))));
    for (std::int64_t id : grid->sigma_edge_nodes()) {
        const Vec x = grid->position(id);
        worst = std::max(worst, target_plus.inner->distance(g_plus(x)));
        worst = std::max(worst, target_minus.inner->distance(g_minus(x)));
    }
    return worst;
}

AdmissibilityReport check_admissible(const CoupledField& u, const AdmissibleProblem& p) {
    AdmissibilityReport rep;
    const SplitGrid& g = *p.grid;
    for (Side s : {Side::Plus, Side::Minus}) {
        const Manifold& n = *p.target(s).ambient;
        for (std::int64_t id : g.side_nodes(s)) {
            if (g.node_class(id) == NodeClass::Gamma) continue;
            rep.max_dist_n = std::max(rep.max_dist_n, n.distance(u.value(s, id)));
        }
    }
    for (std::int64_t id : g.gamma_nodes()) {
        const Vec mp = u.trace_plus(id), mm = u.trace_minus(id);
        rep.max_dist_m = std::max(rep.max_dist_m, p.target_plus.inner->distance(mp));
        rep.max_dist_m = std::max(rep.max_dist_m, p.target_minus.inner->distance(mm));
        rep.max_matching = std::max(rep.max_matching,
                                    (mm - p.interface->tubular_forward(mp)).norm());
    }
    return rep;
}

void apply_boundary_data(CoupledField& u, const AdmissibleProblem& p) {
    const SplitGrid& g = *p.grid;
    for (std::int64_t id : g.sigma_nodes(Side::Plus))
        u.set_value(Side::Plus, id, p.g_plus(g.position(id)));
    for (std::int64_t id : g.sigma_nodes(Side::Minus))
        u.set_value(Side::Minus, id, p.g_minus(g.position(id)));
    for (std::int64_t id : g.sigma_edge_nodes()) {
        const Vec x = g.position(id);
        u.set_value(Side::Plus, id, p.g_plus(x));
        u.set_value(Side::Minus, id, p.g_minus(x));
    }
}

void harmonic_fill(const SplitGrid& g, Side s, int k, std::vector<double>& values,
                   const std::vector<std::int64_t>& free_nodes, double rel_tol) {
    if (free_nodes.empty()) return;
    const std::int64_t nfree = static_cast<std::int64_t>(free_nodes.size());
    std::vector<std::int64_t> slot(static_cast<size_t>(g.num_nodes()), -1);
    for (std::int64_t i = 0; i < nfree; ++i) slot[static_cast<size_t>(free_nodes[i])] = i;

    const double inv_h2 = 1.0 / (g.h() * g.h());
    auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
        par_for(nfree, [&](std::int64_t i) {
            const std::int64_t id = free_nodes[static_cast<size_t>(i)];
            for (int c = 0; c < k; ++c) out[static_cast<size_t>(i) * k + c] = 0;
            for (int d = 0; d < g.dim(); ++d)
                for (int dir : {+1, -1}) {
                    const std::int64_t nb = g.neighbor(id, d, dir);
                    const double w = dir > 0 ? edge_weight(g, s, id, d)
                                             : (nb >= 0 ? edge_weight(g, s, nb, d) : 0.0);
                    if (w == 0.0) continue;
                    const std::int64_t ns = slot[static_cast<size_t>(nb)];
                    for (int c = 0; c < k; ++c) {
                        const double xn =
                            ns >= 0 ? x[static_cast<size_t>(ns) * k + c] : 0.0;
                        out[static_cast<size_t>(i) * k + c] +=
                            w * inv_h2 * (x[static_cast<size_t>(i) * k + c] - xn);
                    }
                }
        });
    };

    // rhs from the fixed values: b = -A * lift with zero free part
    std::vector<double> b(static_cast<size_t>(nfree) * k, 0.0);
    par_for(nfree, [&](std::int64_t i) {
        const std::int64_t id = free_nodes[static_cast<size_t>(i)];
        for (int d = 0; d < g.dim(); ++d)
            for (int dir : {+1, -1}) {
                const std::int64_t nb = g.neighbor(id, d, dir);
                const double w = dir > 0 ? edge_weight(g, s, id, d)
                                         : (nb >= 0 ? edge_weight(g, s, nb, d) : 0.0);
                if (w == 0.0) continue;
                if (slot[static_cast<size_t>(nb)] >= 0) continue;
                for (int c = 0; c < k; ++c)
                    b[static_cast<size_t>(i) * k + c] +=
                        w * inv_h2 * values[static_cast<size_t>(nb) * k + c];
            }
    });

    std::vector<double> x(static_cast<size_t>(nfree) * k, 0.0);
    CgResult cg = conjugate_gradient(apply, b, x, 20 * static_cast<int>(nfree) + 200, rel_tol);
    if (!cg.converged && cg.residual > 1e-8)
        throw LinearSolveFailure("harmonic fill CG stalled, residual " +
                                 std::to_string(cg.residual));
    par_for(nfree, [&](std::int64_t i) {
        const std::int64_t id = free_nodes[static_cast<size_t>(i)];
        for (int c = 0; c < k; ++c)
            values[static_cast<size_t>(id) * k + c] = x[static_cast<size_t>(i) * k + c];
    });
}

namespace {

// Harmonic fill restricted to the Gamma plane (tangential axes only),
// Dirichlet at the Sigma-edge ring.
void fill_along_gamma(const SplitGrid& g, int k, std::vector<double>& values) {
    const auto& free_nodes = g.gamma_nodes();
    if (free_nodes.empty() || g.dim() == 1) return;
    const std::int64_t nfree = static_cast<std::int64_t>(free_nodes.size());
    std::vector<std::int64_t> slot(static_cast<size_t>(g.num_nodes()), -1);
    for (std::int64_t i = 0; i < nfree; ++i) slot[static_cast<size_t>(free_nodes[i])] = i;

    auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
        par_for(nfree, [&](std::int64_t i) {
            const std::int64_t id = free_nodes[static_cast<size_t>(i)];
            for (int c = 0; c < k; ++c) out[static_cast<size_t>(i) * k + c] = 0;
            for (int d = 0; d < g.dim() - 1; ++d)
                for (int dir : {+1, -1}) {
                    const std::int64_t nb = g.neighbor(id, d, dir);
                    if (nb < 0) continue;
                    const std::int64_t ns = slot[static_cast<size_t>(nb)];
                    for (int c = 0; c < k; ++c) {
                        const double xn = ns >= 0 ? x[static_cast<size_t>(ns) * k + c] : 0.0;
                        out[static_cast<size_t>(i) * k + c] +=
                            x[static_cast<size_t>(i) * k + c] - xn;
                    }
                }
        });
    };
    std::vector<double> b(static_cast<size_t>(nfree) * k, 0.0);
    for (std::int64_t i = 0; i < nfree; ++i) {
        const std::int64_t id = free_nodes[static_cast<size_t>(i)];
        for (int d = 0; d < g.dim() - 1; ++d)
            for (int dir : {+1, -1}) {
                const std::int64_t nb = g.neighbor(id, d, dir);
                if (nb < 0 || slot[static_cast<size_t>(nb)] >= 0) continue;
                for (int c = 0; c < k; ++c)
                    b[static_cast<size_t>(i) * k + c] +=
                        values[static_cast<size_t>(nb) * k + c];
            }
    }
    std::vector<double> x(static_cast<size_t>(nfree) * k, 0.0);
    CgResult cg = conjugate_gradient(apply, b, x, 20 * static_cast<int>(nfree) + 200, 1e-12);
    if (!cg.converged && cg.residual > 1e-8)
        throw LinearSolveFailure("gamma-plane fill CG stalled");
    for (std::int64_t i = 0; i < nfree; ++i) {
        const std::int64_t id = free_nodes[static_cast<size_t>(i)];
        for (int c = 0; c < k; ++c)
            values[static_cast<size_t>(id) * k + c] = x[static_cast<size_t>(i) * k + c];
    }
}

}  // namespace

CoupledField initialize_admissible(const AdmissibleProblem& p) {
    const SplitGrid& g = *p.grid;
    const int k = p.target_plus.ambient->ambient_dim();
    CoupledField u(g, k);
    apply_boundary_data(u, p);

    // Interface trace: harmonic extension of g+ along Gamma, then projection
    // to M+; the minus trace is slaved through Phi+.
    if (g.dim() == 1) {
        // Gamma is a single node and Sigma is empty; extend the plus datum
        // constantly from Sigma+.
        Vec endpoint(1);
        endpoint[0] = g.extent();
        const Vec m0 = projected_or_throw(*p.target_plus.inner, p.g_plus(endpoint),
                                          "initialize_admissible (gamma trace)");
        for (std::int64_t id : g.gamma_nodes()) {
            u.set_value(Side::Plus, id, m0);
            u.set_value(Side::Minus, id, p.interface->forward(m0));
        }
    } else {
        fill_along_gamma(g, k, u.raw(Side::Plus));
        for (std::int64_t id : g.gamma_nodes()) {
            const Vec m = projected_or_throw(*p.target_plus.inner, u.trace_plus(id),
                                             "initialize_admissible (gamma trace)");
            u.set_value(Side::Plus, id, m);
            u.set_value(Side::Minus, id, p.interface->forward(m));
        }
    }

    for (Side s : {Side::Plus, Side::Minus}) {
        harmonic_fill(g, s, k, u.raw(s), g.interior(s));
        const Manifold& n = *p.target(s).ambient;
        for (std::int64_t id : g.interior(s))
            u.set_value(s, id, projected_or_throw(n, u.value(s, id),
                                                  "initialize_admissible (interior)"));
    }
    return u;
}

CoupledField initialize_homogeneous(const AdmissibleProblem& p) {
    const SplitGrid& g = *p.grid;
    const int k = p.target_plus.ambient->ambient_dim();
    CoupledField u(g, k);
    const double e = g.extent();
    auto boundary_point = [&](const Vec& x) {
        double sup = 0;
        for (int d = 0; d < g.dim(); ++d) sup = std::max(sup, std::fabs(x[d]));
        if (sup == 0.0) {
            Vec y(g.dim());
            y[0] = e;
            return y;
        }
        return (e / sup) * x;
    };
    for (Side s : {Side::Plus, Side::Minus}) {
        const Manifold& n = *p.target(s).ambient;
        for (std::int64_t id : g.side_nodes(s)) {
            const Vec y = boundary_point(g.position(id));
            Vec v = s == Side::Plus ? p.g_plus(y) : p.g_minus(y);
            if (g.node_class(id) != NodeClass::Gamma)
                v = projected_or_throw(n, v, "initialize_homogeneous");
            u.set_value(s, id, v);
        }
    }
    for (std::int64_t id : g.gamma_nodes()) {
        const Vec m = projected_or_throw(*p.target_plus.inner, u.trace_plus(id),
                                         "initialize_homogeneous (gamma trace)");
        u.set_value(Side::Plus, id, m);
        u.set_value(Side::Minus, id, p.interface->forward(m));
    }
    apply_boundary_data(u, p);
    return u;
}

MinimizeResult minimize(const AdmissibleProblem& p, const CoupledField& u0,
                        const MinimizeOptions& opts) {
    const SplitGrid& g = *p.grid;
    const int k = u0.components();
    MinimizeResult res{u0, {}, false, 0, 0.0};
    CoupledField& u = res.field;
    CoupledField cand = u;

    const Manifold& nplus = *p.target_plus.ambient;
    const Manifold& nminus = *p.target_minus.ambient;
    const Manifold& mplus = *p.target_plus.inner;
    const Manifold& mminus = *p.target_minus.inner;
    const InterfaceMap& phi = *p.interface;

    double energy = edge_energy(u);
    res.ledger.push(0.0, energy);

    // descent directions (mass-normalized projected gradients), stored per
    // node like the field arrays
    std::vector<double> dir_plus(u.raw(Side::Plus).size(), 0.0);
    std::vector<double> dir_minus(u.raw(Side::Minus).size(), 0.0);

    const double tau0 = opts.tau0_factor * g.h() * g.h();
    int flat_count = 0;

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        const std::vector<double> gp = edge_energy_gradient(u, Side::Plus);
        const std::vector<double> gm = edge_energy_gradient(u, Side::Minus);

        double decrement = 0.0;
        double gsup = 0.0;

        for (Side s : {Side::Plus, Side::Minus}) {
            const std::vector<double>& grad = s == Side::Plus ? gp : gm;
            std::vector<double>& dir = s == Side::Plus ? dir_plus : dir_minus;
            const Manifold& n = s == Side::Plus ? nplus : nminus;
            const auto& ids = g.interior(s);
            std::vector<double> dec_part(ids.size(), 0.0);
            par_for(static_cast<std::int64_t>(ids.size()), [&](std::int64_t i) {
                const std::int64_t id = ids[static_cast<size_t>(i)];
                const size_t base = static_cast<size_t>(id) * k;
                Vec gvec(k);
                for (int c = 0; c < k; ++c) gvec[c] = grad[base + c];
                const Vec t = n.tangent_project(u.value(s, id), gvec);
                const double mu = g.weight(id, s);
                for (int c = 0; c < k; ++c) dir[base + c] = -t[c] / mu;
                dec_part[static_cast<size_t>(i)] = t.norm2() / mu;
            });
            for (size_t i = 0; i < ids.size(); ++i) {
                decrement += dec_part[i];
                const size_t base = static_cast<size_t>(ids[i]) * k;
                double d2 = 0;
                for (int c = 0; c < k; ++c) d2 += dir[base + c] * dir[base + c];
                gsup = std::max(gsup, std::sqrt(d2));
            }
        }

        // Gamma rows: gradient with respect to the plus trace, pulling the
        // minus-side variational derivative back through (DPhi+)^t.
        for (std::int64_t id : g.gamma_nodes()) {
            const size_t base = static_cast<size_t>(id) * k;
            const Vec m = u.trace_plus(id);
            const Vec am = u.trace_minus(id);
            Vec vplus(k), vminus(k);
            for (int c = 0; c < k; ++c) {
                vplus[c] = gp[base + c];
                vminus[c] = gm[base + c];
            }
            const Vec gtan = mplus.tangent_project(m, vplus) +
                             phi.adjoint_derivative(m, mminus.tangent_project(am, vminus));
            const double mu = g.weight(id, Side::Plus) + g.weight(id, Side::Minus);
            for (int c = 0; c < k; ++c) dir_plus[base + c] = -gtan[c] / mu;
            decrement += gtan.norm2() / mu;
            gsup = std::max(gsup, gtan.norm() / mu);
        }

        res.final_gradient_norm = gsup;
        if (decrement == 0.0 || gsup <= opts.gradient_tol) {
            res.converged = true;
            res.iterations = iter - 1;
            break;
        }
        // the full-step energy decrease is below the floating-point
        // resolution of the energy: converged to machine precision
        if (tau0 * decrement <= 1e-15 * std::max(energy, 1e-300)) {
            res.converged = true;
            res.iterations = iter - 1;
            break;
        }

        double tau = tau0;
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            // candidate = project(u + tau * dir)
            for (Side s : {Side::Plus, Side::Minus}) {
                const std::vector<double>& dir = s == Side::Plus ? dir_plus : dir_minus;
                const Manifold& n = s == Side::Plus ? nplus : nminus;
                const auto& src = u.raw(s);
                auto& dst = cand.raw(s);
                const auto& ids = g.interior(s);
                par_for(static_cast<std::int64_t>(ids.size()), [&](std::int64_t i) {
                    const std::int64_t id = ids[static_cast<size_t>(i)];
                    const size_t base = static_cast<size_t>(id) * k;
                    Vec v(k);
                    for (int c = 0; c < k; ++c) v[c] = src[base + c] + tau * dir[base + c];
                    const Vec q = n.project(v);
                    for (int c = 0; c < k; ++c) dst[base + c] = q[c];
                });
            }
            for (std::int64_t id : g.gamma_nodes()) {
                const size_t base = static_cast<size_t>(id) * k;
                Vec v(k);
                for (int c = 0; c < k; ++c)
                    v[c] = u.raw(Side::Plus)[base + c] + tau * dir_plus[base + c];
                const Vec mnew = mplus.project(v);
                cand.set_value(Side::Plus, id, mnew);
                cand.set_value(Side::Minus, id, phi.forward(mnew));
            }

            const double e_new = edge_energy(cand);
            if (e_new <= energy - opts.armijo_c * tau * decrement || !opts.backtracking) {
                const double drop = energy - e_new;
                energy = e_new;
                std::swap(u.raw(Side::Plus), cand.raw(Side::Plus));
                std::swap(u.raw(Side::Minus), cand.raw(Side::Minus));
                accepted = true;
                if (drop <= opts.energy_tol * std::max(energy, 1e-30))
                    ++flat_count;
                else
                    flat_count = 0;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) {
            // backtracking can only exhaust legitimately while the predicted
            // decrease is resolvable; otherwise the energy has reached its
            // floating-point floor
            if (tau0 * decrement <= 1e-12 * std::max(energy, 1e-300)) {
                res.converged = true;
                res.iterations = iter - 1;
                break;
            }
            throw StepFailure("backtracking exhausted at iteration " +
                              std::to_string(iter));
        }
        res.iterations = iter;
        if (iter % opts.ledger_stride == 0) res.ledger.push(iter, energy);
        if (flat_count >= 5) {
            res.converged = true;
            break;
        }
    }
    if (res.ledger.t.back() != res.iterations) res.ledger.push(res.iterations, energy);
    return res;
}

CoupledField prolong(const CoupledField& coarse, const AdmissibleProblem& fine_problem) {
    const SplitGrid& g = *fine_problem.grid;
    const int k = coarse.components();
    CoupledField u(g, k);
    for (Side s : {Side::Plus, Side::Minus}) {
        const Manifold& n = *fine_problem.target(s).ambient;
        for (std::int64_t id : g.interior(s)) {
            const Vec v = side_interpolate(coarse, s, g.position(id));
            u.set_value(s, id, n.project(v));
        }
    }
    for (std::int64_t id : g.gamma_nodes()) {
        const Vec v = side_interpolate(coarse, Side::Plus, g.position(id));
        const Vec m = fine_problem.target_plus.inner->project(v);
        u.set_value(Side::Plus, id, m);
        u.set_value(Side::Minus, id, fine_problem.interface->forward(m));
    }
    apply_boundary_data(u, fine_problem);
    return u;
}

CoupledField radial_comparison(const CoupledField& u, const AdmissibleProblem& p,
                               const Vec& x0, double r) {
    const SplitGrid& g = *p.grid;
    require_ball_inside(g, x0, r);
    if (std::fabs(x0[g.split_axis()]) > 1e-12)
        throw ConfigError("radial_comparison center must lie on Gamma");
    CoupledField out = u;
    for (Side s : {Side::Plus, Side::Minus}) {
        const Manifold& n = *p.target(s).ambient;
        for (std::int64_t id : g.side_nodes(s)) {
            const NodeClass c = g.node_class(id);
            if (is_fixed_boundary(c)) continue;
            const Vec x = g.position(id);
            const double rho = (x - x0).norm();
            if (rho >= r || rho < 1e-14) continue;
            const Vec y = x0 + (r / rho) * (x - x0);
            const Vec v = side_interpolate(u, s, y);
            if (c == NodeClass::Gamma) {
                if (s == Side::Plus) {
                    const Vec m = p.target_plus.inner->project(v);
                    out.set_value(Side::Plus, id, m);
                    out.set_value(Side::Minus, id, p.interface->forward(m));
                }
                // minus trace handled with the plus one
            } else {
                out.set_value(s, id, n.project(v));
            }
        }
    }
    return out;
}

TraceField flux_residual(const CoupledField& u, const AdmissibleProblem& p) {
    const TraceField dplus = normal_derivative_at_interface(u, Side::Plus);
    const TraceField dminus = normal_derivative_at_interface(u, Side::Minus);
    TraceField out;
    out.carrier = Carrier::Gamma;
    out.nodes = dplus.nodes;
    out.points = dplus.points;
    out.values.resize(out.nodes.size());
    for (size_t i = 0; i < out.nodes.size(); ++i) {
        const std::int64_t id = out.nodes[i];
        const Vec m = u.trace_plus(id);
        const Vec am = u.trace_minus(id);
        const Vec tp = p.target_plus.inner->tangent_project(m, dplus.values[i]);
        const Vec tm = p.target_minus.inner->tangent_project(am, dminus.values[i]);
        out.values[i] = tp - p.interface->adjoint_derivative(m, tm);
    }
    return out;
}

double flux_residual_max(const CoupledField& u, const AdmissibleProblem& p) {
    const TraceField residual = flux_residual(u, p);
    double worst = 0;
    for (const Vec& v : residual.values) worst = std::max(worst, v.norm());
    return worst;
}

// ---- interpolation_extension_2d ---------------------------------------

namespace {

// Quadrature of |d eta / d theta|^2 and |eta - mean|^2 over a half circle.
void trace_functionals(const std::function<Vec(double)>& eta, double th_lo, double th_hi,
                       double& dirichlet, double& deviation, Vec& mean) {
    const int m = 2048;
    const double dth = (th_hi - th_lo) / m;
    mean = Vec(eta(th_lo).size());
    for (int i = 0; i <= m; ++i) {
        const double w = (i == 0 || i == m) ? 0.5 : 1.0;
        mean += (w * dth) * eta(th_lo + i * dth);
    }
    mean *= 1.0 / (th_hi - th_lo);
    dirichlet = 0;
    deviation = 0;
    for (int i = 0; i <= m; ++i) {
        const double th = th_lo + i * dth;
        const double w = (i == 0 || i == m) ? 0.5 : 1.0;
        const double step = std::min(dth, 1e-5);
        const Vec d = (1.0 / (2 * step)) *
                      (eta(std::min(th + step, th_hi)) - eta(std::max(th - step, th_lo)));
        const double frac = (std::min(th + step, th_hi) - std::max(th - step, th_lo)) /
                            (2 * step);
        Vec dd = (1.0 / frac) * d;
        dirichlet += w * dth * dd.norm2();
        deviation += w * dth * (eta(th) - mean).norm2();
    }
    // H^0 endpoint terms of the deviation
    deviation += (eta(th_lo) - mean).norm2() + (eta(th_hi) - mean).norm2();
}

double disc_edge_energy(const CoupledField& f, Side s) {
    const SplitGrid& g = f.grid();
    const int k = f.components();
    const double inv_h2 = 1.0 / (g.h() * g.h());
    double total = 0;
    for (std::int64_t id : g.side_nodes(s)) {
        if (g.position(id).norm() > 1.0 + 1e-12) continue;
        for (int d = 0; d < g.dim(); ++d) {
            const std::int64_t nb = g.neighbor(id, d, +1);
            if (nb < 0 || !g.on_side(nb, s)) continue;
            if (g.position(nb).norm() > 1.0 + 1e-12) continue;
            const double w = edge_weight(g, s, id, d);
            if (w == 0.0) continue;
            double d2 = 0;
            for (int c = 0; c < k; ++c) {
                const double dd = f.raw(s)[static_cast<size_t>(nb) * k + c] -
                                  f.raw(s)[static_cast<size_t>(id) * k + c];
                d2 += dd * dd;
            }
            total += 0.5 * w * d2 * inv_h2;
        }
    }
    return total;
}

}  // namespace

DiscExtensionResult interpolation_extension_2d(const DiscExtensionInput& in) {
    DiscExtensionResult res;
    res.grid = std::make_shared<SplitGrid>(2, in.h, 1.0);
    const SplitGrid& g = *res.grid;
    const int k = in.target_plus.ambient->ambient_dim();
    res.field = std::make_unique<CoupledField>(g, k);
    CoupledField& u = *res.field;

    Vec mean_p, mean_m;
    trace_functionals(in.eta_plus, 0.0, M_PI, res.trace_dirichlet_plus,
                      res.trace_deviation_plus, mean_p);
    trace_functionals(in.eta_minus, -M_PI, 0.0, res.trace_dirichlet_minus,
                      res.trace_deviation_minus, mean_m);
    const double threshold = in.delta * in.delta * std::pow(in.eps, in.q);
    if (res.trace_dirichlet_plus * res.trace_deviation_plus > threshold ||
        res.trace_dirichlet_minus * res.trace_deviation_minus > threshold)
        throw OscillationTooLarge("trace oscillation functional exceeds delta^2 eps^q");

    const Manifold& mplus = *in.target_plus.inner;
    const Manifold& nplus = *in.target_plus.ambient;
    const Manifold& nminus = *in.target_minus.ambient;

    // diameter values: linear interpolation between the eta+ endpoints,
    // projected to M+; the minus side is slaved through Phi+.
    const Vec end_right = in.eta_plus(0.0);   // (1, 0)
    const Vec end_left = in.eta_plus(M_PI);   // (-1, 0)
    std::vector<std::int64_t> diameter = g.gamma_nodes();
    for (std::int64_t id : g.sigma_edge_nodes()) diameter.push_back(id);
    for (std::int64_t id : diameter) {
        const double t = g.position(id)[0];
        const Vec w = 0.5 * (1 - t) * end_left + 0.5 * (1 + t) * end_right;
        if (mplus.distance(w) >= mplus.tubular_radius())
            throw OscillationTooLarge("diameter interpolant left the tubular neighborhood");
        const Vec m = mplus.project(w);
        u.set_value(Side::Plus, id, m);
        u.set_value(Side::Minus, id, in.interface->forward(m));
    }

    for (Side s : {Side::Plus, Side::Minus}) {
        const auto& eta = s == Side::Plus ? in.eta_plus : in.eta_minus;
        // Dirichlet on and outside the circle
        std::vector<std::int64_t> free_nodes;
        for (std::int64_t id : g.interior(s)) {
            const Vec x = g.position(id);
            if (x.norm() >= 1.0 - 1e-12) {
                double th = std::atan2(x[1], x[0]);
                if (s == Side::Plus) th = std::clamp(th, 0.0, M_PI);
                else th = std::clamp(th, -M_PI, 0.0);
                u.set_value(s, id, eta(th));
            } else {
                free_nodes.push_back(id);
            }
        }
        for (std::int64_t id : g.sigma_nodes(s)) {
            const Vec x = g.position(id);
            double th = std::atan2(x[1], x[0]);
            if (s == Side::Plus) th = std::clamp(th, 0.0, M_PI);
            else th = std::clamp(th, -M_PI, 0.0);
            u.set_value(s, id, eta(th));
        }
        harmonic_fill(g, s, k, u.raw(s), free_nodes);
        const Manifold& n = s == Side::Plus ? nplus : nminus;
        for (std::int64_t id : free_nodes) {
            const Vec v = u.value(s, id);
            if (n.distance(v) >= n.tubular_radius())
                throw OscillationTooLarge("harmonic fill left the tubular neighborhood of " +
                                          n.name());
            u.set_value(s, id, n.project(v));
        }
    }

    res.disc_energy_plus = disc_edge_energy(u, Side::Plus);
    res.disc_energy_minus = disc_edge_energy(u, Side::Minus);
    auto measured = [&](double e, double t1, double t2) {
        const double excess = e - in.eps * t1;
        return t2 > 1e-300 ? std::max(0.0, excess) / (std::pow(in.eps, -in.q) * t2) : 0.0;
    };
    res.measured_constant_plus =
        measured(res.disc_energy_plus, res.trace_dirichlet_plus, res.trace_deviation_plus);
    res.measured_constant_minus =
        measured(res.disc_energy_minus, res.trace_dirichlet_minus, res.trace_deviation_minus);
    return res;
}

// ---- homogeneous_cylinder_extension ------------------------------------

namespace {

double closure_arc_energy(const std::function<Vec(double, double)>& u0, double delta,
                          bool plus_side) {
    // int over the half circle |(y,s)| = delta, s >= 0 (plus) of the squared
    // arc-length derivative.
    const int m = 1024;
    const double lo = plus_side ? 0.0 : -M_PI;
    const double hi = plus_side ? M_PI : 0.0;
    const double dth = (hi - lo) / m;
    double acc = 0;
    for (int i = 0; i <= m; ++i) {
        const double th = lo + i * dth;
        const double w = (i == 0 || i == m) ? 0.5 : 1.0;
        const double step = 1e-6;
        const Vec d = (1.0 / (2 * step)) *
                      (u0(delta * std::cos(th + step), delta * std::sin(th + step)) -
                       u0(delta * std::cos(th - step), delta * std::sin(th - step)));
        acc += w * dth * (1.0 / (delta * delta)) * d.norm2() * delta;  // dsigma = delta dth
    }
    return acc;
}

double closure_halfdisc_energy(const std::function<Vec(double, double)>& f, double delta,
                               bool plus_side) {
    const int m = 128;
    const double h = 2 * delta / m;
    double acc = 0;
    for (int i = 0; i <= m; ++i)
        for (int j = 0; j <= m; ++j) {
            const double y = -delta + i * h;
            const double s = -delta + j * h;
            if (plus_side && s < 0) continue;
            if (!plus_side && s > 0) continue;
            if (std::sqrt(y * y + s * s) > delta) continue;
            const double step = 1e-6;
            const Vec dy = (1.0 / (2 * step)) * (f(y + step, s) - f(y - step, s));
            const Vec ds = (1.0 / (2 * step)) * (f(y, s + step) - f(y, s - step));
            acc += h * h * (dy.norm2() + ds.norm2());
        }
    return acc;
}

}  // namespace

CylinderExtensionResult homogeneous_cylinder_extension(const CylinderExtensionInput& in) {
    CylinderExtensionResult res;
    const double delta = in.delta;
    const double h = delta / in.cells;
    // grid axes: 0 = y (in Gamma), 1 = t (cylinder axis), 2 = s (split)
    res.grid = std::make_shared<SplitGrid>(3, h, delta);
    const SplitGrid& g = *res.grid;
    const int k = in.target_plus.ambient->ambient_dim();
    res.field = std::make_unique<CoupledField>(g, k);
    CoupledField& u = *res.field;

    auto boundary_value = [&](Side s, double py, double pt, double ps) {
        const double rad = std::sqrt(py * py + ps * ps);
        const bool plus = s == Side::Plus;
        if (rad >= std::fabs(pt) * (1.0 - 1e-12)) {
            const auto& lateral = plus ? in.lateral_plus : in.lateral_minus;
            return lateral(py, ps);
        }
        if (pt > 0) return plus ? in.top_plus(py, ps) : in.top_minus(py, ps);
        return plus ? in.bottom_plus(py, ps) : in.bottom_minus(py, ps);
    };

    for (Side s : {Side::Plus, Side::Minus}) {
        for (std::int64_t id : g.side_nodes(s)) {
            const Vec x = g.position(id);  // (y, t, s)
            const double rad = std::sqrt(x[0] * x[0] + x[2] * x[2]);
            if (rad > delta + 1e-12) continue;  // outside the cylinder
            const double gauge = std::max(rad, std::fabs(x[1]));
            if (gauge < 1e-14) {
                u.set_value(s, id, boundary_value(s, delta, 0.0, 0.0));
                continue;
            }
            const double f = delta / gauge;
            u.set_value(s, id, boundary_value(s, f * x[0], f * x[1], f * x[2]));
        }
    }

    // edge energy restricted to the cylinder cross-section
    auto cyl_energy = [&](Side s) {
        const double inv_h2 = 1.0 / (h * h);
        double total = 0;
        for (std::int64_t id : g.side_nodes(s)) {
            const Vec x = g.position(id);
            if (std::sqrt(x[0] * x[0] + x[2] * x[2]) > delta + 1e-12) continue;
            for (int d = 0; d < 3; ++d) {
                const std::int64_t nb = g.neighbor(id, d, +1);
                if (nb < 0 || !g.on_side(nb, s)) continue;
                const Vec xn = g.position(nb);
                if (std::sqrt(xn[0] * xn[0] + xn[2] * xn[2]) > delta + 1e-12) continue;
                const double w = edge_weight(g, s, id, d);
                if (w == 0.0) continue;
                double d2 = 0;
                for (int c = 0; c < k; ++c) {
                    const double dd = u.raw(s)[static_cast<size_t>(nb) * k + c] -
                                      u.raw(s)[static_cast<size_t>(id) * k + c];
                    d2 += dd * dd;
                }
                total += 0.5 * w * d2 * inv_h2;
            }
        }
        return total;
    };
    res.extension_energy_plus = cyl_energy(Side::Plus);
    res.extension_energy_minus = cyl_energy(Side::Minus);

    res.e_bottom_plus = closure_halfdisc_energy(in.bottom_plus, delta, true);
    res.e_bottom_minus = closure_halfdisc_energy(in.bottom_minus, delta, false);
    res.e_top_plus = closure_halfdisc_energy(in.top_plus, delta, true);
    res.e_top_minus = closure_halfdisc_energy(in.top_minus, delta, false);
    res.e_lateral_plus = closure_arc_energy(in.lateral_plus, delta, true);
    res.e_lateral_minus = closure_arc_energy(in.lateral_minus, delta, false);

    auto c_of = [&](double e, double e1, double e2, double e0) {
        const double denom = delta * (e1 + e2 + delta * e0);
        return denom > 1e-300 ? e / denom : 0.0;
    };
    res.measured_c_plus = c_of(res.extension_energy_plus, res.e_bottom_plus, res.e_top_plus,
                               res.e_lateral_plus);
    res.measured_c_minus = c_of(res.extension_energy_minus, res.e_bottom_minus,
                                res.e_top_minus, res.e_lateral_minus);

    for (std::int64_t id : g.gamma_nodes()) {
        const Vec x = g.position(id);
        if (std::fabs(x[0]) > delta + 1e-12) continue;
        const Vec mp = u.trace_plus(id);
        const Vec mm = u.trace_minus(id);
        res.max_interface_mismatch = std::max(
            res.max_interface_mismatch, (mm - in.interface->tubular_forward(mp)).norm());
    }
    return res;
}

}  // namespace hmlab
