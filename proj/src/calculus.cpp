#include "hmlab/calculus.hpp"

#include <algorithm>
#include <cmath>

#include "hmlab/parallel.hpp"

namespace hmlab {

namespace {

// One-sided / centered first derivative along an axis for one component
// bundle. id must belong to the side's closed domain.
inline void axis_derivative(const SplitGrid& g, const std::vector<double>& a, int k,
                            std::int64_t id, int axis, Side s, double* out) {
    const double h = g.h();
    const auto mi = g.multi_index(id);
    const int npa = g.nodes_per_axis();
    const int mid = npa / 2;
    int lo_lim = 0, hi_lim = npa - 1;
    if (axis == g.split_axis()) {
        if (s == Side::Plus) lo_lim = mid;
        else hi_lim = mid;
    }
    const int i = mi[axis];
    const std::int64_t up = g.neighbor(id, axis, +1);
    const std::int64_t dn = g.neighbor(id, axis, -1);
    const size_t base = static_cast<size_t>(id) * k;
    if (i > lo_lim && i < hi_lim) {
        const size_t bu = static_cast<size_t>(up) * k, bd = static_cast<size_t>(dn) * k;
        for (int c = 0; c < k; ++c) out[c] = (a[bu + c] - a[bd + c]) / (2 * h);
    } else if (i == lo_lim) {
        const std::int64_t up2 = g.neighbor(up, axis, +1);
        const size_t b1 = static_cast<size_t>(up) * k, b2 = static_cast<size_t>(up2) * k;
        for (int c = 0; c < k; ++c)
            out[c] = (-3 * a[base + c] + 4 * a[b1 + c] - a[b2 + c]) / (2 * h);
    } else {
        const std::int64_t dn2 = g.neighbor(dn, axis, -1);
        const size_t b1 = static_cast<size_t>(dn) * k, b2 = static_cast<size_t>(dn2) * k;
        for (int c = 0; c < k; ++c)
            out[c] = (3 * a[base + c] - 4 * a[b1 + c] + a[b2 + c]) / (2 * h);
    }
}

}  // namespace

std::vector<double> discrete_gradient_raw(const SplitGrid& g, Side s, int k,
                                          const std::vector<double>& a) {
    const int n = g.dim();
    std::vector<double> grad(static_cast<size_t>(g.num_nodes()) * n * k, 0.0);
    const auto& nodes = g.side_nodes(s);
    par_for(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t i) {
        const std::int64_t id = nodes[static_cast<size_t>(i)];
        for (int d = 0; d < n; ++d)
            axis_derivative(g, a, k, id, d, s,
                            grad.data() + (static_cast<size_t>(id) * n + d) * k);
    });
    return grad;
}

std::vector<double> discrete_gradient(const CoupledField& f, Side s) {
    return discrete_gradient_raw(f.grid(), s, f.components(), f.raw(s));
}

Vec gradient_row(const SplitGrid& g, const std::vector<double>& grad, int k,
                 std::int64_t id, int axis) {
    Vec v(k);
    const size_t base = (static_cast<size_t>(id) * g.dim() + axis) * k;
    for (int c = 0; c < k; ++c) v[c] = grad[base + c];
    return v;
}

double discrete_energy_side(const CoupledField& f, Side s) {
    const SplitGrid& g = f.grid();
    const int k = f.components(), n = g.dim();
    const std::vector<double> grad = discrete_gradient(f, s);
    const auto& nodes = g.side_nodes(s);
    return ordered_sum(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t i) {
        const std::int64_t id = nodes[static_cast<size_t>(i)];
        const size_t base = static_cast<size_t>(id) * n * k;
        double s2 = 0;
        for (int j = 0; j < n * k; ++j) s2 += grad[base + j] * grad[base + j];
        return 0.5 * g.weight(id, s) * s2;
    });
}

double discrete_energy(const CoupledField& f) {
    return discrete_energy_side(f, Side::Plus) + discrete_energy_side(f, Side::Minus);
}

double edge_weight(const SplitGrid& g, Side s, std::int64_t id, int axis) {
    const std::int64_t nb = g.neighbor(id, axis, +1);
    if (nb < 0 || !g.on_side(id, s) || !g.on_side(nb, s)) return 0.0;
    const auto mi = g.multi_index(id);
    const int npa = g.nodes_per_axis();
    const int mid = npa / 2;
    double w = std::pow(g.h(), g.dim());
    for (int d = 0; d < g.dim(); ++d) {
        if (d == axis) continue;
        int lo_lim = 0, hi_lim = npa - 1;
        if (d == g.split_axis()) {
            if (s == Side::Plus) lo_lim = mid;
            else hi_lim = mid;
        }
        if (mi[d] == lo_lim || mi[d] == hi_lim) w *= 0.5;
    }
    return w;
}

double edge_energy_side(const CoupledField& f, Side s) {
    const SplitGrid& g = f.grid();
    const int k = f.components();
    const double inv_h2 = 1.0 / (g.h() * g.h());
    const std::vector<double>& a = f.raw(s);
    const auto& nodes = g.side_nodes(s);
    return ordered_sum(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t i) {
        const std::int64_t id = nodes[static_cast<size_t>(i)];
        double acc = 0;
        for (int d = 0; d < g.dim(); ++d) {
            const double w = edge_weight(g, s, id, d);
            if (w == 0.0) continue;
            const std::int64_t nb = g.neighbor(id, d, +1);
            const size_t ba = static_cast<size_t>(id) * k, bb = static_cast<size_t>(nb) * k;
            double d2 = 0;
            for (int c = 0; c < k; ++c) {
                const double dd = a[bb + c] - a[ba + c];
                d2 += dd * dd;
            }
            acc += 0.5 * w * d2 * inv_h2;
        }
        return acc;
    });
}

double edge_energy(const CoupledField& f) {
    return edge_energy_side(f, Side::Plus) + edge_energy_side(f, Side::Minus);
}

void edge_energy_gradient_raw(const SplitGrid& g, Side s, int k, const std::vector<double>& a,
                              std::vector<double>& r) {
    const double inv_h2 = 1.0 / (g.h() * g.h());
    r.assign(a.size(), 0.0);
    const auto& nodes = g.side_nodes(s);
    par_for(static_cast<std::int64_t>(nodes.size()), [&](std::int64_t i) {
        const std::int64_t id = nodes[static_cast<size_t>(i)];
        const size_t ba = static_cast<size_t>(id) * k;
        for (int d = 0; d < g.dim(); ++d) {
            const std::int64_t up = g.neighbor(id, d, +1);
            const std::int64_t dn = g.neighbor(id, d, -1);
            const double wu = edge_weight(g, s, id, d);
            const double wd = dn >= 0 ? edge_weight(g, s, dn, d) : 0.0;
            if (wu != 0.0) {
                const size_t bu = static_cast<size_t>(up) * k;
                for (int c = 0; c < k; ++c) r[ba + c] += wu * (a[ba + c] - a[bu + c]) * inv_h2;
            }
            if (wd != 0.0) {
                const size_t bd = static_cast<size_t>(dn) * k;
                for (int c = 0; c < k; ++c) r[ba + c] += wd * (a[ba + c] - a[bd + c]) * inv_h2;
            }
        }
    });
}

std::vector<double> edge_energy_gradient(const CoupledField& f, Side s) {
    std::vector<double> r;
    edge_energy_gradient_raw(f.grid(), s, f.components(), f.raw(s), r);
    return r;
}

TraceField normal_derivative_at_interface(const CoupledField& f, Side s) {
    const SplitGrid& g = f.grid();
    const int k = f.components();
    const int axis = g.split_axis();
    const std::vector<double>& a = f.raw(s);
    TraceField t;
    t.carrier = Carrier::Gamma;
    t.nodes = g.gamma_nodes();
    t.values.resize(t.nodes.size());
    t.points.resize(t.nodes.size());
    par_for(static_cast<std::int64_t>(t.nodes.size()), [&](std::int64_t i) {
        const std::int64_t id = t.nodes[static_cast<size_t>(i)];
        Vec v(k);
        axis_derivative(g, a, k, id, axis, s, v.data());
        t.values[static_cast<size_t>(i)] = v;
        t.points[static_cast<size_t>(i)] = g.position(id);
    });
    return t;
}

Vec side_interpolate(const CoupledField& f, Side s, const Vec& y) {
    const SplitGrid& g = f.grid();
    const int k = f.components(), n = g.dim();
    const double h = g.h(), e = g.extent();
    const int npa = g.nodes_per_axis();
    const int mid = npa / 2;
    int cell[3] = {0, 0, 0};
    double frac[3] = {0, 0, 0};
    for (int d = 0; d < n; ++d) {
        double coord = (y[d] + e) / h;
        int lo_cell = 0, hi_cell = npa - 2;
        if (d == g.split_axis()) {
            if (s == Side::Plus) lo_cell = mid;
            else hi_cell = mid - 1;
        }
        int c = static_cast<int>(std::floor(coord));
        c = std::clamp(c, lo_cell, hi_cell);
        cell[d] = c;
        frac[d] = std::clamp(coord - c, 0.0, 1.0);
    }
    const std::vector<double>& a = f.raw(s);
    Vec out(k);
    const int corners = 1 << n;
    for (int mask = 0; mask < corners; ++mask) {
        double w = 1.0;
        int ix[3] = {cell[0], cell[1], cell[2]};
        for (int d = 0; d < n; ++d) {
            if (mask & (1 << d)) {
                w *= frac[d];
                ix[d] += 1;
            } else {
                w *= 1.0 - frac[d];
            }
        }
        const std::int64_t id = g.node_id(ix[0], n > 1 ? ix[1] : 0, n > 2 ? ix[2] : 0);
        const size_t base = static_cast<size_t>(id) * k;
        for (int c = 0; c < k; ++c) out[c] += w * a[base + c];
    }
    return out;
}

void require_ball_inside(const SplitGrid& g, const Vec& center, double r) {
    for (int d = 0; d < g.dim(); ++d)
        if (std::fabs(center[d]) + r > g.extent() + 1e-12)
            throw BallExceedsDomain("ball of radius " + std::to_string(r) +
                                    " leaves the domain");
}

double ball_indicator(const Vec& x, const Vec& center, double r, double h) {
    return std::clamp((r - (x - center).norm()) / h + 0.5, 0.0, 1.0);
}

BallRestriction ball_restriction(const CoupledField& f, const Vec& center, double r) {
    const SplitGrid& g = f.grid();
    require_ball_inside(g, center, r);
    BallRestriction out;
    if (r < g.h()) {
        out.degenerate = true;
        return out;
    }
    for (Side s : {Side::Plus, Side::Minus}) {
        auto& inside = s == Side::Plus ? out.inside_plus : out.inside_minus;
        for (std::int64_t id : g.side_nodes(s))
            if ((g.position(id) - center).norm() <= r) inside.push_back(id);
    }
    const int n = g.dim();
    auto add_sample = [&](Side s, const Vec& dir) {
        Vec y = center + r * dir;
        TraceField& t = s == Side::Plus ? out.sphere_plus : out.sphere_minus;
        t.carrier = Carrier::Sphere;
        t.points.push_back(y);
        t.values.push_back(side_interpolate(f, s, y));
    };
    if (n == 1) {
        add_sample(Side::Plus, Vec{1.0});
        add_sample(Side::Minus, Vec{-1.0});
    } else if (n == 2) {
        const int nth = std::max(16, static_cast<int>(std::ceil(2 * M_PI * r / g.h())) * 2);
        for (int i = 0; i <= nth; ++i) {
            const double th = M_PI * i / nth;  // upper half circle
            add_sample(Side::Plus, Vec{std::cos(th), std::sin(th)});
            add_sample(Side::Minus, Vec{std::cos(th), -std::sin(th)});
        }
    } else {
        const int nphi = std::max(8, static_cast<int>(std::ceil(M_PI * r / g.h())));
        const int nth = 2 * nphi;
        for (int j = 0; j <= nphi; ++j) {
            const double phi = 0.5 * M_PI * j / nphi;  // polar angle from equator
            for (int i = 0; i < nth; ++i) {
                const double th = 2 * M_PI * i / nth;
                const double c = std::cos(phi);
                add_sample(Side::Plus, Vec{c * std::cos(th), c * std::sin(th), std::sin(phi)});
                add_sample(Side::Minus, Vec{c * std::cos(th), c * std::sin(th), -std::sin(phi)});
            }
        }
    }
    return out;
}

}  // namespace hmlab
