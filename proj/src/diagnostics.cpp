#include "hmlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "hmlab/calculus.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

namespace {

// |grad u|^2 per node per side, cached for quadratures.
std::vector<double> grad_norm2(const CoupledField& u, Side s) {
    const SplitGrid& g = u.grid();
    const int k = u.components(), n = g.dim();
    const std::vector<double> grad = discrete_gradient(u, s);
    std::vector<double> out(static_cast<size_t>(g.num_nodes()), 0.0);
    const auto& nodes = g.side_nodes(s);
    par_for(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t i) {
        const std::int64_t id = nodes[static_cast<size_t>(i)];
        const size_t base = static_cast<size_t>(id) * n * k;
        double acc = 0;
        for (int j = 0; j < n * k; ++j) acc += grad[base + j] * grad[base + j];
        out[static_cast<size_t>(id)] = acc;
    });
    return out;
}

double ball_energy(const SplitGrid& g, const std::vector<double>& gp,
                   const std::vector<double>& gm, const Vec& x0, double rho) {
    double acc = 0;
    for (Side s : {Side::Plus, Side::Minus}) {
        const auto& gn = s == Side::Plus ? gp : gm;
        for (std::int64_t id : g.side_nodes(s)) {
            const double ind = ball_indicator(g.position(id), x0, rho, g.h());
            if (ind == 0.0) continue;
            acc += g.weight(id, s) * ind * gn[static_cast<size_t>(id)];
        }
    }
    return acc;
}

}  // namespace

// Shell functional S(rho) = int_{dB_rho cap Omega+-} (|grad_tan u|^2 [+
// |d_rho u|^2]) dsigma from interpolated sphere samples. Tangential
// derivatives stay within one side (the traces are double valued), radial
// ones use central differences at rho +- h/2.
namespace {

struct ShellValue {
    double tangential = 0;
    double radial = 0;
    double total() const { return tangential + radial; }
};

ShellValue shell_functional(const CoupledField& u, const Vec& x0, double rho,
                            const Manifold* proj_plus, const Manifold* proj_minus) {
    const SplitGrid& g = u.grid();
    const int n = g.dim();
    const double dr = 0.5 * g.h();
    ShellValue out;

    auto sample = [&](Side s, const Vec& y) {
        Vec v = side_interpolate(u, s, y);
        const Manifold* m = s == Side::Plus ? proj_plus : proj_minus;
        if (m && m->distance(v) < 0.9 * m->tubular_radius()) v = m->project(v);
        return v;
    };
    auto radial2 = [&](Side s, const Vec& dir) {
        const Vec up = sample(s, x0 + (rho + dr) * dir);
        const Vec dn = sample(s, x0 + (rho - dr) * dir);
        return ((1.0 / (2 * dr)) * (up - dn)).norm2();
    };

    if (n == 1) {
        for (double sgn : {+1.0, -1.0}) {
            Vec dir(1);
            dir[0] = sgn;
            out.radial += radial2(sgn > 0 ? Side::Plus : Side::Minus, dir);
        }
        return out;
    }
    if (n == 2) {
        const int m = std::max(12, static_cast<int>(std::ceil(M_PI * rho / g.h())));
        const double dth = M_PI / m;
        for (Side s : {Side::Plus, Side::Minus}) {
            const double sgn = s == Side::Plus ? 1.0 : -1.0;
            std::vector<Vec> vals(static_cast<size_t>(m) + 1);
            for (int i = 0; i <= m; ++i) {
                const double th = i * dth;
                const Vec dir{std::cos(th), sgn * std::sin(th)};
                vals[static_cast<size_t>(i)] = sample(s, x0 + rho * dir);
            }
            for (int i = 0; i <= m; ++i) {
                Vec dt(vals.front().size());
                if (i == 0)
                    dt = (1.0 / (2 * dth)) * (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]);
                else if (i == m)
                    dt = (1.0 / (2 * dth)) *
                         (3.0 * vals[static_cast<size_t>(m)] -
                          4.0 * vals[static_cast<size_t>(m) - 1] +
                          vals[static_cast<size_t>(m) - 2]);
                else
                    dt = (1.0 / (2 * dth)) *
                         (vals[static_cast<size_t>(i) + 1] - vals[static_cast<size_t>(i) - 1]);
                const double w = (i == 0 || i == m ? 0.5 : 1.0) * dth * rho;
                const double th = i * dth;
                const Vec dir{std::cos(th), sgn * std::sin(th)};
                out.tangential += w * dt.norm2() / (rho * rho);
                out.radial += w * radial2(s, dir);
            }
        }
        return out;
    }
    // n == 3: midpoint latitudes (no equator or pole samples), periodic
    // longitudes
    const int mphi = std::max(6, static_cast<int>(std::ceil(0.5 * M_PI * rho / g.h())));
    const int mth = 4 * mphi;
    const double dphi = 0.5 * M_PI / mphi;
    const double dth = 2 * M_PI / mth;
    std::vector<std::vector<Vec>> vals(static_cast<size_t>(mphi),
                                       std::vector<Vec>(static_cast<size_t>(mth)));
    for (Side s : {Side::Plus, Side::Minus}) {
        const double sgn = s == Side::Plus ? 1.0 : -1.0;
        auto dir_at = [&](int j, int i) {
            const double phi = (j + 0.5) * dphi;
            const double th = i * dth;
            return Vec{std::cos(phi) * std::cos(th), std::cos(phi) * std::sin(th),
                       sgn * std::sin(phi)};
        };
        for (int j = 0; j < mphi; ++j)
            for (int i = 0; i < mth; ++i)
                vals[static_cast<size_t>(j)][static_cast<size_t>(i)] =
                    sample(s, x0 + rho * dir_at(j, i));
        for (int j = 0; j < mphi; ++j) {
            const double phi = (j + 0.5) * dphi;
            const double cphi = std::cos(phi);
            for (int i = 0; i < mth; ++i) {
                const auto& row = vals[static_cast<size_t>(j)];
                const Vec dth_vec =
                    (1.0 / (2 * dth)) *
                    (row[static_cast<size_t>((i + 1) % mth)] -
                     row[static_cast<size_t>((i + mth - 1) % mth)]);
                Vec dphi_vec(row.front().size());
                if (j == 0 && mphi >= 3)
                    dphi_vec = (1.0 / (2 * dphi)) *
                               (-3.0 * vals[0][static_cast<size_t>(i)] +
                                4.0 * vals[1][static_cast<size_t>(i)] -
                                vals[2][static_cast<size_t>(i)]);
                else if (j == mphi - 1 && mphi >= 3)
                    dphi_vec = (1.0 / (2 * dphi)) *
                               (3.0 * vals[static_cast<size_t>(j)][static_cast<size_t>(i)] -
                                4.0 * vals[static_cast<size_t>(j) - 1][static_cast<size_t>(i)] +
                                vals[static_cast<size_t>(j) - 2][static_cast<size_t>(i)]);
                else if (mphi >= 3)
                    dphi_vec = (1.0 / (2 * dphi)) *
                               (vals[static_cast<size_t>(j) + 1][static_cast<size_t>(i)] -
                                vals[static_cast<size_t>(j) - 1][static_cast<size_t>(i)]);
                const double w = rho * rho * cphi * dphi * dth;
                out.tangential +=
                    w * (dphi_vec.norm2() + dth_vec.norm2() / (cphi * cphi)) / (rho * rho);
                out.radial += w * radial2(s, dir_at(j, i));
            }
        }
    }
    return out;
}

// int_{B_r} |grad u|^2 over both sides by radial shell integration. The
// core B_{2h} is modeled scale invariantly (exact for degree-zero
// homogeneous fields, where the lattice cannot resolve the density).
double shell_ball_energy(const CoupledField& u, const Vec& x0, double r,
                         const Manifold* proj_plus, const Manifold* proj_minus) {
    const SplitGrid& g = u.grid();
    const int n = g.dim();
    const double rho0 = 2 * g.h();
    if (r <= rho0 + 0.5 * g.h()) {
        // tiny balls: fall back to the nodal volume quadrature
        const std::vector<double> gp = grad_norm2(u, Side::Plus);
        const std::vector<double> gm = grad_norm2(u, Side::Minus);
        return ball_energy(g, gp, gm, x0, r);
    }
    const int shells = std::max(2, static_cast<int>(std::ceil((r - rho0) / (0.5 * g.h()))));
    const double drho = (r - rho0) / shells;
    double acc = 0;
    ShellValue first;
    for (int j = 0; j <= shells; ++j) {
        const ShellValue sv = shell_functional(u, x0, rho0 + j * drho, proj_plus, proj_minus);
        if (j == 0) first = sv;
        acc += (j == 0 || j == shells ? 0.5 : 1.0) * drho * sv.total();
    }
    double core = 0;
    if (n == 3)
        core = rho0 * first.tangential + (rho0 / 3.0) * first.radial;
    else if (n == 2)
        core = 0.5 * rho0 * first.total();
    else
        core = rho0 * first.total();
    return acc + core;
}

}  // namespace

double renormalized_ball_energy(const CoupledField& u, const Vec& x0, double rho,
                                const Manifold* proj_plus, const Manifold* proj_minus) {
    const SplitGrid& g = u.grid();
    return std::pow(rho, 2 - g.dim()) *
           shell_ball_energy(u, x0, rho, proj_plus, proj_minus);
}

MonotonicityCurve static_monotonicity_curve(const CoupledField& u, const Vec& x0,
                                            const std::vector<double>& radii,
                                            double c_distortion,
                                            const Manifold* proj_plus,
                                            const Manifold* proj_minus) {
    const SplitGrid& g = u.grid();
    MonotonicityCurve curve;
    curve.center = x0;
    curve.radii = radii;
    curve.distortion_constant = c_distortion;
    for (double r : radii) require_ball_inside(g, x0, r);

    for (double r : radii) {
        const double e = shell_ball_energy(u, x0, r, proj_plus, proj_minus);
        curve.theta.push_back(std::exp(c_distortion * r) * std::pow(r, 2 - g.dim()) * e);
    }

    // annulus radial-derivative deficit per consecutive gap
    const int k = u.components(), n = g.dim();
    const std::vector<double> grad_p = discrete_gradient(u, Side::Plus);
    const std::vector<double> grad_m = discrete_gradient(u, Side::Minus);
    for (size_t j = 0; j + 1 < radii.size(); ++j) {
        const double r1 = radii[j], r2 = radii[j + 1];
        double acc = 0;
        for (Side s : {Side::Plus, Side::Minus}) {
            const auto& grad = s == Side::Plus ? grad_p : grad_m;
            for (std::int64_t id : g.side_nodes(s)) {
                const Vec x = g.position(id);
                const double rho = (x - x0).norm();
                if (rho < 1e-14) continue;
                const double ind = ball_indicator(x, x0, r2, g.h()) -
                                   ball_indicator(x, x0, r1, g.h());
                if (ind <= 0.0) continue;
                Vec radial(k);
                for (int d = 0; d < n; ++d) {
                    const double comp = (x[d] - x0[d]) / rho;
                    const Vec row = gradient_row(g, grad, k, id, d);
                    radial += comp * row;
                }
                acc += g.weight(id, s) * ind * std::pow(rho, 2 - n) * radial.norm2();
            }
        }
        curve.deficit.push_back(acc);
        const double dtheta = curve.theta[j + 1] - curve.theta[j];
        curve.max_violation = std::max(curve.max_violation, -dtheta);
        curve.max_deficit_violation = std::max(curve.max_deficit_violation, acc - dtheta);
    }
    return curve;
}

StruweQuantity struwe_curve(const Trajectory& traj, const Vec& x0, double t0,
                            const std::vector<double>& radii) {
    if (traj.frames.empty()) throw InsufficientHistory("empty trajectory");
    const SplitGrid& g = traj.frames.front().grid();
    const int n = g.dim(), k = traj.frames.front().components();
    StruweQuantity q;
    q.center = x0;
    q.t0 = t0;
    q.radii = radii;

    for (double r : radii) {
        const double t_slice = t0 - r * r;
        if (t_slice < traj.times.front() - 1e-12)
            throw InsufficientHistory("trajectory does not reach t0 - R^2");
        // nearest stored frame
        size_t best = 0;
        double best_d = 1e300;
        for (size_t i = 0; i < traj.times.size(); ++i) {
            const double d = std::fabs(traj.times[i] - t_slice);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        const CoupledField& frame = traj.frames[best];
        q.slice_times.push_back(traj.times[best]);

        const double tau = r * r;  // t0 - t at the slice (by construction)
        const double norm = std::pow(4 * M_PI * tau, -0.5 * n);
        const std::vector<double> gp = grad_norm2(frame, Side::Plus);
        const std::vector<double> gm = grad_norm2(frame, Side::Minus);

        double value = 0, mass = 0, rhs = 0;
        // du/dt from the neighboring frame when available
        const CoupledField* other = nullptr;
        double dt_frames = 0;
        if (best + 1 < traj.frames.size()) {
            other = &traj.frames[best + 1];
            dt_frames = traj.times[best + 1] - traj.times[best];
        } else if (best > 0) {
            other = &traj.frames[best - 1];
            dt_frames = traj.times[best] - traj.times[best - 1];
        }
        const std::vector<double> grad_p = discrete_gradient(frame, Side::Plus);
        const std::vector<double> grad_m = discrete_gradient(frame, Side::Minus);
        for (Side s : {Side::Plus, Side::Minus}) {
            const auto& gn = s == Side::Plus ? gp : gm;
            const auto& grad = s == Side::Plus ? grad_p : grad_m;
            for (std::int64_t id : g.side_nodes(s)) {
                const Vec x = g.position(id);
                const double w = g.weight(id, s);
                const double gauss = norm * std::exp(-(x - x0).norm2() / (4 * tau));
                mass += w * gauss;
                value += w * gauss * gn[static_cast<size_t>(id)];
                if (other) {
                    Vec scal(k);
                    for (int d = 0; d < n; ++d)
                        scal += (x[d] - x0[d]) * gradient_row(g, grad, k, id, d);
                    Vec dudt = (1.0 / dt_frames) *
                               (other->value(s, id) - frame.value(s, id));
                    // backward difference when only the previous frame exists
                    if (best + 1 >= traj.frames.size() && best > 0) dudt *= -1.0;
                    const Vec expr = scal - (2 * tau) * dudt;
                    rhs += w * gauss * expr.norm2();
                }
            }
        }
        q.values.push_back(r * r * value);
        q.kernel_mass.push_back(mass);
        q.rhs.push_back(other ? rhs / r : 0.0);
        q.max_mass_defect = std::max(q.max_mass_defect, std::fabs(1.0 - mass));
    }
    for (size_t i = 0; i + 1 < q.values.size(); ++i)
        q.max_violation = std::max(q.max_violation, q.values[i] - q.values[i + 1]);
    return q;
}

RegularityMap singular_set_detect(const CoupledField& u, double r, double eps0,
                                  bool include_interior, double hoelder_alpha,
                                  const Manifold* proj_plus, const Manifold* proj_minus) {
    const SplitGrid& g = u.grid();
    if (r < 4 * g.h())
        throw ScaleBelowGrid("detector scale must be at least 4h");
    RegularityMap map;
    map.scale = r;
    map.eps0 = eps0;

    std::vector<std::int64_t> nodes = g.gamma_nodes();
    if (include_interior) {
        for (std::int64_t id : g.interior(Side::Plus)) nodes.push_back(id);
        for (std::int64_t id : g.interior(Side::Minus)) nodes.push_back(id);
    }
    for (std::int64_t id : nodes) {
        const Vec x0 = g.position(id);
        bool fits = true;
        for (int d = 0; d < g.dim(); ++d)
            if (std::fabs(x0[d]) + r > g.extent() + 1e-12) fits = false;
        if (!fits) continue;
        const double theta = renormalized_ball_energy(u, x0, r, proj_plus, proj_minus);
        map.nodes.push_back(id);
        map.energy.push_back(theta);
        map.flagged.push_back(theta > eps0 * eps0 ? 1 : 0);
        double hq = 0;
        if (theta <= eps0 * eps0) {
            // empirical Hoelder quotient over node pairs inside the ball
            for (Side s : {Side::Plus, Side::Minus}) {
                const Vec center_val = u.value(s, id);
                for (std::int64_t nb : g.side_nodes(s)) {
                    const double d = (g.position(nb) - x0).norm();
                    if (d < g.h() / 2 || d > r) continue;
                    hq = std::max(hq, (u.value(s, nb) - center_val).norm() /
                                          std::pow(d, hoelder_alpha));
                }
            }
        }
        map.hoelder.push_back(hq);
    }
    return map;
}

double energy_decay_ratio(const CoupledField& u, const Vec& x0, double r,
                          double theta_factor, const Manifold* proj_plus,
                          const Manifold* proj_minus) {
    const SplitGrid& g = u.grid();
    require_ball_inside(g, x0, r);
    if (theta_factor <= 0 || theta_factor >= 1)
        throw ConfigError("decay factor must lie in (0,1)");
    const double big = renormalized_ball_energy(u, x0, r, proj_plus, proj_minus);
    const double small =
        renormalized_ball_energy(u, x0, theta_factor * r, proj_plus, proj_minus);
    if (big <= 1e-18) return 0.0;  // 0/0 by convention
    return small / big;
}

}  // namespace hmlab
