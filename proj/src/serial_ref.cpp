#include "hmlab/serial_ref.hpp"

#include <cmath>

namespace hmlab::serial_ref {

namespace {

// Half-weight factor of a node coordinate on the closed side domain.
double node_factor(const SplitGrid& g, Side s, const std::array<int, 3>& mi, int skip_axis) {
    const int npa = g.nodes_per_axis();
    const int mid = npa / 2;
    double w = 1.0;
    for (int d = 0; d < g.dim(); ++d) {
        if (d == skip_axis) continue;
        int lo = 0, hi = npa - 1;
        if (d == g.split_axis()) {
            if (s == Side::Plus) lo = mid;
            else hi = mid;
        }
        if (mi[d] == lo || mi[d] == hi) w *= 0.5;
    }
    return w;
}

bool in_side(const SplitGrid& g, Side s, const std::array<int, 3>& mi) {
    const int mid = g.nodes_per_axis() / 2;
    const int iz = mi[g.split_axis()];
    return s == Side::Plus ? iz >= mid : iz <= mid;
}

}  // namespace

double edge_energy_side(const CoupledField& f, Side s) {
    const SplitGrid& g = f.grid();
    const int k = f.components();
    const double hn = std::pow(g.h(), g.dim());
    const double inv_h2 = 1.0 / (g.h() * g.h());
    double total = 0.0;
    for (std::int64_t id = 0; id < g.num_nodes(); ++id) {
        const auto mi = g.multi_index(id);
        if (!in_side(g, s, mi)) continue;
        for (int d = 0; d < g.dim(); ++d) {
            const std::int64_t nb = g.neighbor(id, d, +1);
            if (nb < 0) continue;
            const auto mj = g.multi_index(nb);
            if (!in_side(g, s, mj)) continue;
            const double w = hn * node_factor(g, s, mi, d);
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

std::vector<double> edge_energy_gradient(const CoupledField& f, Side s) {
    const SplitGrid& g = f.grid();
    const int k = f.components();
    const double hn = std::pow(g.h(), g.dim());
    const double inv_h2 = 1.0 / (g.h() * g.h());
    std::vector<double> r(f.raw(s).size(), 0.0);
    for (std::int64_t id = 0; id < g.num_nodes(); ++id) {
        const auto mi = g.multi_index(id);
        if (!in_side(g, s, mi)) continue;
        for (int d = 0; d < g.dim(); ++d) {
            const std::int64_t nb = g.neighbor(id, d, +1);
            if (nb < 0) continue;
            const auto mj = g.multi_index(nb);
            if (!in_side(g, s, mj)) continue;
            const double w = hn * node_factor(g, s, mi, d);
            for (int c = 0; c < k; ++c) {
                const double dd = (f.raw(s)[static_cast<size_t>(id) * k + c] -
                                   f.raw(s)[static_cast<size_t>(nb) * k + c]) *
                                  inv_h2 * w;
                r[static_cast<size_t>(id) * k + c] += dd;
                r[static_cast<size_t>(nb) * k + c] -= dd;
            }
        }
    }
    return r;
}

std::vector<double> discrete_gradient(const CoupledField& f, Side s) {
    const SplitGrid& g = f.grid();
    const int k = f.components(), n = g.dim();
    const int npa = g.nodes_per_axis();
    const int mid = npa / 2;
    const double h = g.h();
    const std::vector<double>& a = f.raw(s);
    std::vector<double> grad(static_cast<size_t>(g.num_nodes()) * n * k, 0.0);
    for (std::int64_t id = 0; id < g.num_nodes(); ++id) {
        const auto mi = g.multi_index(id);
        if (!in_side(g, s, mi)) continue;
        for (int d = 0; d < n; ++d) {
            int lo = 0, hi = npa - 1;
            if (d == g.split_axis()) {
                if (s == Side::Plus) lo = mid;
                else hi = mid;
            }
            double* out = grad.data() + (static_cast<size_t>(id) * n + d) * k;
            auto at = [&](std::int64_t node, int c) {
                return a[static_cast<size_t>(node) * k + c];
            };
            if (mi[d] > lo && mi[d] < hi) {
                for (int c = 0; c < k; ++c)
                    out[c] = (at(g.neighbor(id, d, +1), c) - at(g.neighbor(id, d, -1), c)) /
                             (2 * h);
            } else if (mi[d] == lo) {
                const std::int64_t n1 = g.neighbor(id, d, +1);
                const std::int64_t n2 = g.neighbor(n1, d, +1);
                for (int c = 0; c < k; ++c)
                    out[c] = (-3 * at(id, c) + 4 * at(n1, c) - at(n2, c)) / (2 * h);
            } else {
                const std::int64_t n1 = g.neighbor(id, d, -1);
                const std::int64_t n2 = g.neighbor(n1, d, -1);
                for (int c = 0; c < k; ++c)
                    out[c] = (3 * at(id, c) - 4 * at(n1, c) + at(n2, c)) / (2 * h);
            }
        }
    }
    return grad;
}

}  // namespace hmlab::serial_ref
