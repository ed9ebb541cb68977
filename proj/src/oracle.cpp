#include "hmlab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "hmlab/calculus.hpp"
#include "hmlab/diagnostics.hpp"
#include "hmlab/linsolve.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

namespace {

double det_small(const Mat& m) {
    const int n = m.rows();
    Mat a = m;
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
        if (piv != col) {
            for (int j = 0; j < n; ++j) std::swap(a(col, j), a(piv, j));
            det = -det;
        }
        if (a(col, col) == 0.0) return 0.0;
        det *= a(col, col);
        for (int r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            for (int j = col; j < n; ++j) a(r, j) -= f * a(col, j);
        }
    }
    return det;
}

}  // namespace

TransmissionSolution solve_coupled_harmonic(const LinearTransmissionProblem& prob) {
    const SplitGrid& g = *prob.grid;
    const int k = prob.k, mn = prob.m_n, d = k + mn;
    if (std::fabs(det_small(prob.coupling)) < 1e-12)
        throw SingularCoupling("coupling matrix P is numerically singular");

    TransmissionSolution sol;
    sol.grid = prob.grid;
    sol.k = k;
    sol.m_n = mn;
    sol.coupling = prob.coupling;
    sol.plus.assign(static_cast<size_t>(g.num_nodes()) * d, 0.0);
    sol.minus.assign(static_cast<size_t>(g.num_nodes()) * d, 0.0);

    // Dirichlet everywhere on/outside the unit sphere (and the box rim).
    auto is_free = [&](std::int64_t id) { return g.position(id).norm() < 1.0 - 1e-12; };

    std::vector<std::int64_t> free_plus, free_minus, free_gamma;
    std::vector<std::int64_t> slot_plus(static_cast<size_t>(g.num_nodes()), -1);
    std::vector<std::int64_t> slot_minus(static_cast<size_t>(g.num_nodes()), -1);
    std::vector<std::int64_t> slot_gamma(static_cast<size_t>(g.num_nodes()), -1);
    for (std::int64_t id : g.interior(Side::Plus))
        if (is_free(id)) {
            slot_plus[static_cast<size_t>(id)] =
                static_cast<std::int64_t>(free_plus.size());
            free_plus.push_back(id);
        }
    for (std::int64_t id : g.interior(Side::Minus))
        if (is_free(id)) {
            slot_minus[static_cast<size_t>(id)] =
                static_cast<std::int64_t>(free_minus.size());
            free_minus.push_back(id);
        }
    for (std::int64_t id : g.gamma_nodes())
        if (is_free(id)) {
            slot_gamma[static_cast<size_t>(id)] =
                static_cast<std::int64_t>(free_gamma.size());
            free_gamma.push_back(id);
        }

    // fill Dirichlet data
    for (Side s : {Side::Plus, Side::Minus}) {
        auto& arr = s == Side::Plus ? sol.plus : sol.minus;
        const auto& data = s == Side::Plus ? prob.boundary_plus : prob.boundary_minus;
        for (std::int64_t id : g.side_nodes(s)) {
            if (is_free(id)) continue;
            const Vec v = data(g.position(id));
            for (int c = 0; c < d; ++c) arr[static_cast<size_t>(id) * d + c] = v[c];
        }
    }

    const double inv_h2 = 1.0 / (g.h() * g.h());

    // ---- normal blocks: per-side scalar problems, zero Dirichlet on Gamma
    for (Side s : {Side::Plus, Side::Minus}) {
        auto& arr = s == Side::Plus ? sol.plus : sol.minus;
        const auto& free_nodes = s == Side::Plus ? free_plus : free_minus;
        const auto& slot = s == Side::Plus ? slot_plus : slot_minus;
        const std::int64_t nf = static_cast<std::int64_t>(free_nodes.size());
        for (int comp = k; comp < d; ++comp) {
            auto apply = [&](const std::vector<double>& x, std::vector<double>& out) {
                par_for(nf, [&](std::int64_t i) {
                    const std::int64_t id = free_nodes[static_cast<size_t>(i)];
                    double acc = 0;
                    for (int dd = 0; dd < g.dim(); ++dd)
                        for (int dir : {+1, -1}) {
                            const std::int64_t nb = g.neighbor(id, dd, dir);
                            const double w = dir > 0
                                                 ? edge_weight(g, s, id, dd)
                                                 : (nb >= 0 ? edge_weight(g, s, nb, dd) : 0.0);
                            if (w == 0.0) continue;
                            const std::int64_t ns = slot[static_cast<size_t>(nb)];
                            const double xn = ns >= 0 ? x[static_cast<size_t>(ns)] : 0.0;
                            acc += w * inv_h2 * (x[static_cast<size_t>(i)] - xn);
                        }
                    out[static_cast<size_t>(i)] = acc;
                });
            };
            std::vector<double> b(static_cast<size_t>(nf), 0.0);
            par_for(nf, [&](std::int64_t i) {
                const std::int64_t id = free_nodes[static_cast<size_t>(i)];
                double acc = 0;
                for (int dd = 0; dd < g.dim(); ++dd)
                    for (int dir : {+1, -1}) {
                        const std::int64_t nb = g.neighbor(id, dd, dir);
                        const double w = dir > 0 ? edge_weight(g, s, id, dd)
                                                 : (nb >= 0 ? edge_weight(g, s, nb, dd) : 0.0);
                        if (w == 0.0) continue;
                        if (slot[static_cast<size_t>(nb)] >= 0) continue;
                        // Gamma ball nodes carry zero Dirichlet for the
                        // normal block
                        double dval = 0.0;
                        const NodeClass c = g.node_class(nb);
                        if (!(c == NodeClass::Gamma && is_free(nb)))
                            dval = arr[static_cast<size_t>(nb) * d + comp];
                        acc += w * inv_h2 * dval;
                    }
                b[static_cast<size_t>(i)] = acc;
            });
            std::vector<double> x(static_cast<size_t>(nf), 0.0);
            CgResult cg =
                conjugate_gradient(apply, b, x, 10 * static_cast<int>(nf) + 200, 1e-12);
            if (!cg.converged && cg.residual > 1e-8)
                throw LinearSolveFailure("oracle normal-block CG stalled");
            for (std::int64_t i = 0; i < nf; ++i)
                arr[static_cast<size_t>(free_nodes[static_cast<size_t>(i)]) * d + comp] =
                    x[static_cast<size_t>(i)];
        }
        // zero out the normal block on free Gamma rows of this side's array
        for (std::int64_t id : free_gamma)
            for (int comp = k; comp < d; ++comp)
                arr[static_cast<size_t>(id) * d + comp] = 0.0;
    }

    // ---- tangential blocks: coupled through theta on Gamma -------------
    const std::int64_t np = static_cast<std::int64_t>(free_plus.size());
    const std::int64_t nm = static_cast<std::int64_t>(free_minus.size());
    const std::int64_t ng = static_cast<std::int64_t>(free_gamma.size());
    const std::int64_t total = (np + nm + ng) * k;
    const Mat pt = prob.coupling.transposed();

    // scratch full arrays of the k tangential components
    std::vector<double> ap(static_cast<size_t>(g.num_nodes()) * k, 0.0);
    std::vector<double> am(static_cast<size_t>(g.num_nodes()) * k, 0.0);
    std::vector<double> gp, gm;

    auto scatter = [&](const std::vector<double>& z, bool with_dirichlet) {
        std::fill(ap.begin(), ap.end(), 0.0);
        std::fill(am.begin(), am.end(), 0.0);
        for (std::int64_t i = 0; i < np; ++i) {
            const std::int64_t id = free_plus[static_cast<size_t>(i)];
            for (int c = 0; c < k; ++c)
                ap[static_cast<size_t>(id) * k + c] = z[i * k + c];
        }
        for (std::int64_t i = 0; i < nm; ++i) {
            const std::int64_t id = free_minus[static_cast<size_t>(i)];
            for (int c = 0; c < k; ++c)
                am[static_cast<size_t>(id) * k + c] = z[(np + i) * k + c];
        }
        for (std::int64_t i = 0; i < ng; ++i) {
            const std::int64_t id = free_gamma[static_cast<size_t>(i)];
            Vec th(k);
            for (int c = 0; c < k; ++c) th[c] = z[(np + nm + i) * k + c];
            const Vec pm = prob.coupling.apply(th);
            for (int c = 0; c < k; ++c) {
                ap[static_cast<size_t>(id) * k + c] = th[c];
                am[static_cast<size_t>(id) * k + c] = pm[c];
            }
        }
        if (with_dirichlet) {
            for (Side s : {Side::Plus, Side::Minus}) {
                auto& arr = s == Side::Plus ? ap : am;
                const auto& full = s == Side::Plus ? sol.plus : sol.minus;
                for (std::int64_t id : g.side_nodes(s)) {
                    if (is_free(id)) continue;
                    for (int c = 0; c < k; ++c)
                        arr[static_cast<size_t>(id) * k + c] =
                            full[static_cast<size_t>(id) * d + c];
                }
            }
        }
    };

    auto gather = [&](std::vector<double>& out) {
        for (std::int64_t i = 0; i < np; ++i) {
            const std::int64_t id = free_plus[static_cast<size_t>(i)];
            for (int c = 0; c < k; ++c)
                out[i * k + c] = gp[static_cast<size_t>(id) * k + c];
        }
        for (std::int64_t i = 0; i < nm; ++i) {
            const std::int64_t id = free_minus[static_cast<size_t>(i)];
            for (int c = 0; c < k; ++c)
                out[(np + i) * k + c] = gm[static_cast<size_t>(id) * k + c];
        }
        for (std::int64_t i = 0; i < ng; ++i) {
            const std::int64_t id = free_gamma[static_cast<size_t>(i)];
            Vec vp(k), vm(k);
            for (int c = 0; c < k; ++c) {
                vp[c] = gp[static_cast<size_t>(id) * k + c];
                vm[c] = gm[static_cast<size_t>(id) * k + c];
            }
            const Vec row = vp + pt.apply(vm);
            for (int c = 0; c < k; ++c) out[(np + nm + i) * k + c] = row[c];
        }
    };

    auto apply = [&](const std::vector<double>& z, std::vector<double>& out) {
        scatter(z, false);
        edge_energy_gradient_raw(g, Side::Plus, k, ap, gp);
        edge_energy_gradient_raw(g, Side::Minus, k, am, gm);
        gather(out);
    };

    std::vector<double> b(static_cast<size_t>(total), 0.0);
    {
        std::vector<double> zero(static_cast<size_t>(total), 0.0);
        scatter(zero, true);
        edge_energy_gradient_raw(g, Side::Plus, k, ap, gp);
        edge_energy_gradient_raw(g, Side::Minus, k, am, gm);
        gather(b);
        for (auto& v : b) v = -v;
    }
    std::vector<double> z(static_cast<size_t>(total), 0.0);
    CgResult cg =
        conjugate_gradient(apply, b, z, 10 * static_cast<int>(total) + 400, 1e-12);
    if (!cg.converged && cg.residual > 1e-8)
        throw LinearSolveFailure("oracle tangential CG stalled, residual " +
                                 std::to_string(cg.residual));

    for (std::int64_t i = 0; i < np; ++i) {
        const std::int64_t id = free_plus[static_cast<size_t>(i)];
        for (int c = 0; c < k; ++c)
            sol.plus[static_cast<size_t>(id) * d + c] = z[i * k + c];
    }
    for (std::int64_t i = 0; i < nm; ++i) {
        const std::int64_t id = free_minus[static_cast<size_t>(i)];
        for (int c = 0; c < k; ++c)
            sol.minus[static_cast<size_t>(id) * d + c] = z[(np + i) * k + c];
    }
    for (std::int64_t i = 0; i < ng; ++i) {
        const std::int64_t id = free_gamma[static_cast<size_t>(i)];
        Vec th(k);
        for (int c = 0; c < k; ++c) th[c] = z[(np + nm + i) * k + c];
        const Vec pm = prob.coupling.apply(th);
        for (int c = 0; c < k; ++c) {
            sol.plus[static_cast<size_t>(id) * d + c] = th[c];
            sol.minus[static_cast<size_t>(id) * d + c] = pm[c];
        }
    }
    return sol;
}

ReflectionReport reflection_identities(const TransmissionSolution& sol) {
    const SplitGrid& g = *sol.grid;
    const int k = sol.k, d = sol.k + sol.m_n;
    const int axis = g.split_axis();
    const int mid = g.nodes_per_axis() / 2;
    ReflectionReport rep;

    auto mirror = [&](std::int64_t id) {
        auto mi = g.multi_index(id);
        mi[axis] = 2 * mid - mi[axis];
        return g.node_id(mi[0], g.dim() > 1 ? mi[1] : 0, g.dim() > 2 ? mi[2] : 0);
    };
    auto tangential = [&](const std::vector<double>& arr, std::int64_t id) {
        Vec v(k);
        for (int c = 0; c < k; ++c) v[c] = arr[static_cast<size_t>(id) * d + c];
        return v;
    };
    const Mat pt = sol.coupling.transposed();

    // combinations on the closed upper half ball
    auto c_dir = [&](std::int64_t id) {  // vt-~ - P vt+
        return tangential(sol.minus, mirror(id)) - sol.coupling.apply(tangential(sol.plus, id));
    };
    auto c_neu = [&](std::int64_t id, double sign) {  // vt+ +- P^t vt-~
        return tangential(sol.plus, id) + sign * pt.apply(tangential(sol.minus, mirror(id)));
    };

    const double inv_h2 = 1.0 / (g.h() * g.h());
    for (std::int64_t id : g.interior(Side::Plus)) {
        if (g.position(id).norm() >= 1.0 - g.h() - 1e-12) continue;
        // plain stencil Laplacian of the Dirichlet combination
        Vec acc = (2.0 * g.dim()) * c_dir(id);
        for (int dd = 0; dd < g.dim(); ++dd)
            for (int dir : {+1, -1}) acc -= c_dir(g.neighbor(id, dd, dir));
        rep.dirichlet_combination_interior =
            std::max(rep.dirichlet_combination_interior, acc.norm() * inv_h2 * g.h() * g.h());
    }
    for (std::int64_t id : g.gamma_nodes()) {
        if (g.position(id).norm() >= 1.0 - 1e-12) continue;
        rep.dirichlet_combination_on_gamma =
            std::max(rep.dirichlet_combination_on_gamma, c_dir(id).norm());
        const std::int64_t n1 = g.neighbor(id, axis, +1);
        const std::int64_t n2 = g.neighbor(n1, axis, +1);
        for (double sign : {-1.0, +1.0}) {
            const Vec dn = (1.0 / (2 * g.h())) *
                           (-3.0 * c_neu(id, sign) + 4.0 * c_neu(n1, sign) - c_neu(n2, sign));
            if (sign < 0)
                rep.neumann_residual_minus_comb =
                    std::max(rep.neumann_residual_minus_comb, dn.norm());
            else
                rep.neumann_residual_plus_comb =
                    std::max(rep.neumann_residual_plus_comb, dn.norm());
        }
    }
    rep.plus_combination_is_neumann =
        rep.neumann_residual_plus_comb <= rep.neumann_residual_minus_comb;
    return rep;
}

BlowupReport blowup_consistency_check(const CoupledField& u, const AdmissibleProblem& p,
                                      const Vec& x0, const std::vector<double>& scales,
                                      int oracle_cells) {
    const SplitGrid& g = *p.grid;
    BlowupReport rep;
    const int kamb = u.components();

    for (double r : scales) {
        if (r < 4 * g.h()) throw ScaleBelowGrid("blow-up scale below 4h");
        require_ball_inside(g, x0, r);
    }

    auto oracle_grid = std::make_shared<SplitGrid>(g.dim(), 1.0 / oracle_cells, 1.0);

    for (double r : scales) {
        rep.scales.push_back(r);
        const double theta = renormalized_ball_energy(
            u, x0, r, p.target_plus.ambient.get(), p.target_minus.ambient.get());
        rep.renormalized_energy.push_back(theta);

        // base points: projected average plus trace over Gamma cap B_r
        Vec avg(kamb);
        double cnt = 0;
        for (std::int64_t id : g.gamma_nodes()) {
            if ((g.position(id) - x0).norm() > r) continue;
            avg += u.trace_plus(id);
            cnt += 1;
        }
        if (cnt == 0) {
            avg = u.trace_plus(g.gamma_nodes().front());
            cnt = 1;
        }
        avg *= 1.0 / cnt;
        const Vec a_plus = p.target_plus.inner->project(avg);
        const Vec a_minus = p.interface->forward(a_plus);
        rep.base_plus = a_plus;
        rep.base_minus = a_minus;

        const double eps = std::sqrt(std::max(theta, 0.0));
        if (eps < 1e-14) {
            rep.linear_match.push_back(0.0);
            rep.trace_residual.push_back(0.0);
            continue;
        }

        // frames at the base points
        const std::vector<Vec> tan_p = p.target_plus.inner->tangent_basis(a_plus);
        const std::vector<Vec> tan_m = p.target_minus.inner->tangent_basis(a_minus);
        std::vector<Vec> nor_p, nor_m;
        for (int dd = 0; dd < kamb; ++dd) {
            Vec e(kamb);
            e[dd] = 1.0;
            Vec t = p.target_plus.normal_in_n_project(a_plus, e);
            for (const Vec& bb : nor_p) t -= dot(t, bb) * bb;
            if (t.norm() > 1e-8) nor_p.push_back((1.0 / t.norm()) * t);
            Vec tm = p.target_minus.normal_in_n_project(a_minus, e);
            for (const Vec& bb : nor_m) tm -= dot(tm, bb) * bb;
            if (tm.norm() > 1e-8) nor_m.push_back((1.0 / tm.norm()) * tm);
        }
        const int kk = static_cast<int>(tan_p.size());
        const int mn = static_cast<int>(std::min(nor_p.size(), nor_m.size()));
        const int dfr = kk + mn;
        const Mat pmat = p.interface->frame_matrix(a_plus, tan_p, tan_m);

        auto to_frame = [&](Side s, const Vec& ambient_diff) {
            const auto& tb = s == Side::Plus ? tan_p : tan_m;
            const auto& nb = s == Side::Plus ? nor_p : nor_m;
            Vec f(dfr);
            for (int c = 0; c < kk; ++c) f[c] = dot(ambient_diff, tb[static_cast<size_t>(c)]);
            for (int c = 0; c < mn; ++c)
                f[kk + c] = dot(ambient_diff, nb[static_cast<size_t>(c)]);
            return f;
        };
        auto rescaled = [&](Side s, const Vec& y) {
            Vec yy = x0 + r * y;
            // clamp to the side's closed half space
            const int ax = g.split_axis();
            if (s == Side::Plus && yy[ax] < 0) yy[ax] = 0;
            if (s == Side::Minus && yy[ax] > 0) yy[ax] = 0;
            const Vec base = s == Side::Plus ? a_plus : a_minus;
            return (1.0 / eps) * (side_interpolate(u, s, yy) - base);
        };

        LinearTransmissionProblem lin;
        lin.grid = oracle_grid;
        lin.k = kk;
        lin.m_n = mn;
        lin.coupling = pmat;
        lin.boundary_plus = [&, r](const Vec& y) {
            const double n = y.norm();
            const Vec ys = n > 1.0 ? (1.0 / n) * y : y;
            return to_frame(Side::Plus, rescaled(Side::Plus, ys));
        };
        lin.boundary_minus = [&, r](const Vec& y) {
            const double n = y.norm();
            const Vec ys = n > 1.0 ? (1.0 / n) * y : y;
            return to_frame(Side::Minus, rescaled(Side::Minus, ys));
        };
        const TransmissionSolution lin_sol = solve_coupled_harmonic(lin);

        // L2 mismatch inside the unit ball + trace-condition residual
        double l2 = 0, wsum = 0, trace_res = 0;
        const SplitGrid& og = *oracle_grid;
        for (Side s : {Side::Plus, Side::Minus}) {
            for (std::int64_t id : og.side_nodes(s)) {
                const Vec y = og.position(id);
                if (y.norm() > 1.0) continue;
                const Vec vr = to_frame(s, rescaled(s, y));
                const Vec vl = lin_sol.at(s, id);
                const double w = og.weight(id, s);
                l2 += w * (vr - vl).norm2();
                wsum += w;
            }
        }
        for (std::int64_t id : og.gamma_nodes()) {
            const Vec y = og.position(id);
            if (y.norm() > 1.0) continue;
            const Vec vp = to_frame(Side::Plus, rescaled(Side::Plus, y));
            const Vec vm = to_frame(Side::Minus, rescaled(Side::Minus, y));
            Vec vpt(kk), vmt(kk);
            for (int c = 0; c < kk; ++c) {
                vpt[c] = vp[c];
                vmt[c] = vm[c];
            }
            double res = (vmt - pmat.apply(vpt)).norm();
            for (int c = kk; c < dfr; ++c)
                res = std::max({res, std::fabs(vp[c]), std::fabs(vm[c])});
            trace_res = std::max(trace_res, res);
        }
        rep.linear_match.push_back(std::sqrt(l2 / std::max(wsum, 1e-300)));
        rep.trace_residual.push_back(trace_res);
    }
    for (size_t j = 0; j + 1 < rep.scales.size(); ++j) {
        const double big = rep.renormalized_energy[j];
        const double small = rep.renormalized_energy[j + 1];
        rep.decay_ratio.push_back(big > 1e-300 ? small / big : 0.0);
    }
    return rep;
}


// ---- JSON corpus serialization ------------------------------------------

namespace {

nlohmann::json mat_to_json(const Mat& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

Mat mat_from_json(const nlohmann::json& j) {
    const int r = static_cast<int>(j.size());
    const int c = r > 0 ? static_cast<int>(j[0].size()) : 0;
    Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) m(i, k) = j[i][k].get<double>();
    return m;
}

nlohmann::json grid_to_json(const SplitGrid& g) {
    return {{"dim", g.dim()}, {"h", g.h()}, {"extent", g.extent()}};
}

std::shared_ptr<SplitGrid> grid_from_json(const nlohmann::json& j) {
    return std::make_shared<SplitGrid>(j.at("dim").get<int>(), j.at("h").get<double>(),
                                       j.at("extent").get<double>());
}

}  // namespace

std::string transmission_problem_to_json(const LinearTransmissionProblem& prob) {
    const SplitGrid& g = *prob.grid;
    nlohmann::json j;
    j["grid"] = grid_to_json(g);
    j["k"] = prob.k;
    j["m_n"] = prob.m_n;
    j["coupling"] = mat_to_json(prob.coupling);
    // boundary data sampled at the Dirichlet nodes (everything on/outside
    // the unit sphere)
    for (const char* key : {"boundary_plus", "boundary_minus"}) {
        const bool plus = std::string(key) == "boundary_plus";
        nlohmann::json rows = nlohmann::json::array();
        for (std::int64_t id : g.side_nodes(plus ? Side::Plus : Side::Minus)) {
            if (g.position(id).norm() < 1.0 - 1e-12) continue;
            const Vec v = (plus ? prob.boundary_plus : prob.boundary_minus)(g.position(id));
            nlohmann::json row = {{"node", id}};
            nlohmann::json vals = nlohmann::json::array();
            for (int c = 0; c < v.size(); ++c) vals.push_back(v[c]);
            row["value"] = vals;
            rows.push_back(row);
        }
        j[key] = rows;
    }
    return j.dump(2);
}

LinearTransmissionProblem transmission_problem_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    LinearTransmissionProblem prob;
    prob.grid = grid_from_json(j.at("grid"));
    prob.k = j.at("k").get<int>();
    prob.m_n = j.at("m_n").get<int>();
    prob.coupling = mat_from_json(j.at("coupling"));
    const int d = prob.k + prob.m_n;
    auto make_lookup = [d, grid = prob.grid](const nlohmann::json& rows) {
        auto table = std::make_shared<std::map<std::int64_t, Vec>>();
        for (const auto& row : rows) {
            Vec v(d);
            for (int c = 0; c < d; ++c) v[c] = row.at("value")[c].get<double>();
            (*table)[row.at("node").get<std::int64_t>()] = v;
        }
        const SplitGrid* g = grid.get();
        return [table, g, d](const Vec& x) {
            // nearest-node lookup; serialized corpora are sampled exactly at
            // node positions
            const double h = g->h();
            int ix[3] = {0, 0, 0};
            for (int dd = 0; dd < g->dim(); ++dd)
                ix[dd] = static_cast<int>(std::lround((x[dd] + g->extent()) / h));
            const std::int64_t id = g->node_id(ix[0], g->dim() > 1 ? ix[1] : 0,
                                               g->dim() > 2 ? ix[2] : 0);
            auto it = table->find(id);
            return it != table->end() ? it->second : Vec(d);
        };
    };
    prob.boundary_plus = make_lookup(j.at("boundary_plus"));
    prob.boundary_minus = make_lookup(j.at("boundary_minus"));
    return prob;
}

std::string transmission_solution_to_json(const TransmissionSolution& sol) {
    nlohmann::json j;
    j["grid"] = grid_to_json(*sol.grid);
    j["k"] = sol.k;
    j["m_n"] = sol.m_n;
    j["coupling"] = mat_to_json(sol.coupling);
    j["plus"] = sol.plus;
    j["minus"] = sol.minus;
    return j.dump();
}

TransmissionSolution transmission_solution_from_json(const std::string& text) {
    const nlohmann::json j = nlohmann::json::parse(text);
    TransmissionSolution sol;
    sol.grid = grid_from_json(j.at("grid"));
    sol.k = j.at("k").get<int>();
    sol.m_n = j.at("m_n").get<int>();
    sol.coupling = mat_from_json(j.at("coupling"));
    sol.plus = j.at("plus").get<std::vector<double>>();
    sol.minus = j.at("minus").get<std::vector<double>>();
    return sol;
}

}  // namespace hmlab
