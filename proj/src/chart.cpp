#include "hmlab/chart.hpp"

#include <cmath>

#include "hmlab/errors.hpp"

namespace hmlab {

Mat Chart::metric(const Vec& u) const {
    const int d = coord_dim();
    std::vector<Vec> push(d);
    for (int i = 0; i < d; ++i) push[i] = push_basis(u, i);
    Mat h(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) h(i, j) = h(j, i) = dot(push[i], push[j]);
    return h;
}

Christoffel Chart::christoffel(const Vec& u, double cond_bound) const {
    const int d = coord_dim();
    const double step = 1e-4;

    Mat h = metric(u);
    // Frobenius-norm condition estimate; enough to catch chart breakdown.
    Mat hinv(d, d);
    {
        double normh = 0, normi = 0;
        for (int c = 0; c < d; ++c) {
            Vec e(d);
            e[c] = 1.0;
            Vec col = solve_small(h, e);
            for (int r = 0; r < d; ++r) hinv(r, c) = col[r];
        }
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                normh += h(i, j) * h(i, j);
                normi += hinv(i, j) * hinv(i, j);
            }
        if (!(std::isfinite(normi)) || std::sqrt(normh * normi) > cond_bound)
            throw SingularMetric("chart metric condition estimate exceeds bound");
    }

    // dh[l](i,j) = d h_ij / d u_l, centered differences.
    std::vector<Mat> dh(d);
    for (int l = 0; l < d; ++l) {
        Vec up = u, dn = u;
        up[l] += step;
        dn[l] -= step;
        Mat hp = metric(up), hm = metric(dn);
        dh[l] = Mat(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) dh[l](i, j) = (hp(i, j) - hm(i, j)) / (2 * step);
    }

    Christoffel gamma;
    gamma.n = d;
    for (int kk = 0; kk < d; ++kk)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                double s = 0;
                for (int l = 0; l < d; ++l)
                    s += hinv(kk, l) * (dh[i](j, l) + dh[j](i, l) - dh[l](i, j));
                gamma(kk, i, j) = 0.5 * s;
            }
    return gamma;
}

Christoffel christoffel_eval(const Chart& chart, const Vec& u, double cond_bound) {
    return chart.christoffel(u, cond_bound);
}

// ---- GraphChart ------------------------------------------------------

GraphChart::GraphChart(std::shared_ptr<const Manifold> n,
                       std::shared_ptr<const Manifold> m_or_null, Vec center, double scale)
    : Chart(center, scale, 0, 0, false), n_(std::move(n)) {
    const bool on_m = m_or_null && m_or_null->contains(center, 10 * m_or_null->membership_tol());
    if (on_m) {
        basis_ = m_or_null->tangent_basis(center);
        k_ = static_cast<int>(basis_.size());
        // complete with the normal-in-N directions
        for (int d = 0; d < n_->ambient_dim(); ++d) {
            Vec e(n_->ambient_dim());
            e[d] = 1.0;
            Vec t = n_->tangent_project(center, e);
            for (const Vec& b : basis_) t -= dot(t, b) * b;
            if (t.norm() > 1e-8) basis_.push_back((1.0 / t.norm()) * t);
        }
        m_ = static_cast<int>(basis_.size()) - k_;
        slice_ = true;
    } else {
        basis_ = n_->tangent_basis(center);
        k_ = static_cast<int>(basis_.size());
        m_ = 0;
        slice_ = false;
    }
    if (scale_ > 0.5 * n_->tubular_radius())
        throw ChartFailure("chart scale too large for the tubular neighborhood");
}

Vec GraphChart::to_manifold(const Vec& u) const {
    Vec p = center_;
    for (int i = 0; i < coord_dim(); ++i) p += (scale_ * u[i]) * basis_[i];
    return n_->project(p);
}

Vec GraphChart::push_basis(const Vec& u, int i) const {
    Vec p = center_;
    for (int j = 0; j < coord_dim(); ++j) p += (scale_ * u[j]) * basis_[j];
    return n_->project_jacobian(p, scale_ * basis_[i]);
}

Vec GraphChart::from_manifold(const Vec& p) const {
    const int d = coord_dim();
    Vec u(d);
    for (int i = 0; i < d; ++i) u[i] = dot(p - center_, basis_[i]) / scale_;
    // Newton on |phi(u) - p|^2 through the normal equations.
    for (int it = 0; it < 40; ++it) {
        Vec r = p - to_manifold(u);
        std::vector<Vec> jac(d);
        for (int i = 0; i < d; ++i) jac[i] = push_basis(u, i);
        Mat jtj(d, d);
        Vec jtr(d);
        for (int i = 0; i < d; ++i) {
            jtr[i] = dot(jac[i], r);
            for (int j = i; j < d; ++j) jtj(i, j) = jtj(j, i) = dot(jac[i], jac[j]);
        }
        Vec du = solve_small(jtj, jtr);
        u += du;
        if (du.norm() < 1e-14) break;
    }
    if ((to_manifold(u) - p).norm() > 1e-9 * std::max(1.0, n_->diameter()))
        throw ChartFailure("chart inversion did not converge; point outside chart range");
    return u;
}

// ---- AngleChart ------------------------------------------------------

AngleChart::AngleChart(std::shared_ptr<const Circle> circle, Vec center)
    : Chart(center, 1.0, 1, 0, true), circle_(std::move(circle)) {
    theta0_ = std::atan2(center[1] - circle_->center()[1], center[0] - circle_->center()[0]);
}

Vec AngleChart::to_manifold(const Vec& u) const {
    const double r = circle_->radius();
    const double th = theta0_ + u[0] / r;
    Vec p = circle_->center();
    p[0] += r * std::cos(th);
    p[1] += r * std::sin(th);
    return p;
}

Vec AngleChart::from_manifold(const Vec& p) const {
    const double th = std::atan2(p[1] - circle_->center()[1], p[0] - circle_->center()[0]);
    double d = th - theta0_;
    while (d > M_PI) d -= 2 * M_PI;
    while (d <= -M_PI) d += 2 * M_PI;
    Vec u(1);
    u[0] = circle_->radius() * d;
    return u;
}

Vec AngleChart::push_basis(const Vec& u, int) const {
    const double r = circle_->radius();
    const double th = theta0_ + u[0] / r;
    return Vec{-std::sin(th), std::cos(th)};
}

}  // namespace hmlab
