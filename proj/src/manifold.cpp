#include "hmlab/manifold.hpp"

#include <algorithm>
#include <cmath>

namespace hmlab {

Vec Manifold::project(const Vec& p) const {
    if (!projection_ok(p))
        throw OutsideTubularNeighborhood(name() + ": point at distance " +
                                         std::to_string(distance(p)) +
                                         " >= tubular radius " + std::to_string(tubular_radius()));
    return project_raw(p);
}

bool Manifold::projection_ok(const Vec& p) const { return distance(p) < tubular_radius(); }

double Manifold::distance(const Vec& p) const { return (p - project_raw(p)).norm(); }

bool Manifold::contains(const Vec& p, double tol) const { return distance(p) <= tol; }

Vec Manifold::project_jacobian(const Vec& p, const Vec& v) const {
    const double t = 1e-6 * std::max(1.0, diameter());
    return (1.0 / (2 * t)) * (project_raw(p + t * v) - project_raw(p - t * v));
}

Vec Manifold::tangent_project(const Vec& p, const Vec& v) const {
    // At points of N the Jacobian of the nearest-point projection is the
    // tangent projector.
    return project_jacobian(p, v);
}

Vec Manifold::second_form(const Vec& p, const Vec& x, const Vec& y) const {
    // A(p)(X,Y) = -D^2 Pi(p)[X,Y], by polarization of the diagonal.
    const double t = 1e-4 * std::max(1.0, diameter());
    auto diag = [&](const Vec& z) {
        return (1.0 / (t * t)) * (project_raw(p + t * z) + project_raw(p - t * z) - 2.0 * p);
    };
    const Vec dxy = diag(x + y);
    const Vec dxmy = diag(x - y);
    return -0.25 * (dxy - dxmy);
}

std::vector<Vec> Manifold::tangent_basis(const Vec& p) const {
    std::vector<Vec> basis;
    for (int d = 0; d < ambient_dim() && static_cast<int>(basis.size()) < dim(); ++d) {
        Vec e(ambient_dim());
        e[d] = 1.0;
        Vec t = tangent_project(p, e);
        for (const Vec& b : basis) t -= dot(t, b) * b;
        if (t.norm() > 1e-8) basis.push_back((1.0 / t.norm()) * t);
    }
    return basis;
}

Vec project_to_manifold(const Vec& p, const Manifold& m) { return m.project(p); }

Vec second_form_eval(const Vec& p, const Vec& x, const Vec& y, const Manifold& m,
                     double tangent_tol) {
    const double rx = (x - m.tangent_project(p, x)).norm();
    const double ry = (y - m.tangent_project(p, y)).norm();
    const double scale = std::max({1.0, x.norm(), y.norm()});
    if (rx > tangent_tol * scale || ry > tangent_tol * scale)
        throw NonTangentInput(m.name() + ": projector residual " +
                              std::to_string(std::max(rx, ry)));
    return m.second_form(p, x, y);
}

// ---- Circle ----------------------------------------------------------

Vec Circle::project_raw(const Vec& p) const {
    Vec d = p - c_;
    const double n = d.norm();
    if (n == 0.0) {
        Vec q = c_;
        q[0] += r_;
        return q;
    }
    return c_ + (r_ / n) * d;
}

Vec Circle::project_jacobian(const Vec& p, const Vec& v) const {
    Vec d = p - c_;
    const double n = d.norm();
    Vec nh = (1.0 / n) * d;
    return (r_ / n) * (v - dot(v, nh) * nh);
}

Vec Circle::tangent_project(const Vec& p, const Vec& v) const {
    Vec nh = (1.0 / r_) * (p - c_);
    return v - dot(v, nh) * nh;
}

Vec Circle::second_form(const Vec& p, const Vec& x, const Vec& y) const {
    return (dot(x, y) / (r_ * r_)) * (p - c_);
}

// ---- PlanarCircle3 ---------------------------------------------------

Vec PlanarCircle3::project_raw(const Vec& p) const {
    Vec q = p - c_;
    q[axis_] = 0.0;
    const double n = q.norm();
    if (n == 0.0) {
        Vec r = c_;
        r[(axis_ + 1) % 3] += r_;
        return r;
    }
    return c_ + (r_ / n) * q;
}

Vec PlanarCircle3::tangent_project(const Vec& p, const Vec& v) const {
    // Tangent line: orthogonal to both the plane normal and the radial
    // direction.
    Vec rad = (1.0 / r_) * (p - c_);
    Vec w = v;
    w[axis_] = 0.0;
    return w - dot(w, rad) * rad;
}

Vec PlanarCircle3::second_form(const Vec& p, const Vec& x, const Vec& y) const {
    return (dot(x, y) / (r_ * r_)) * (p - c_);
}

// ---- Sphere ----------------------------------------------------------

Vec Sphere::project_raw(const Vec& p) const {
    Vec d = p - c_;
    const double n = d.norm();
    if (n == 0.0) {
        Vec q = c_;
        q[0] += r_;
        return q;
    }
    return c_ + (r_ / n) * d;
}

Vec Sphere::project_jacobian(const Vec& p, const Vec& v) const {
    Vec d = p - c_;
    const double n = d.norm();
    Vec nh = (1.0 / n) * d;
    return (r_ / n) * (v - dot(v, nh) * nh);
}

Vec Sphere::tangent_project(const Vec& p, const Vec& v) const {
    Vec nh = (1.0 / r_) * (p - c_);
    return v - dot(v, nh) * nh;
}

Vec Sphere::second_form(const Vec& p, const Vec& x, const Vec& y) const {
    return (dot(x, y) / (r_ * r_)) * (p - c_);
}

// ---- Torus -----------------------------------------------------------

Vec Torus::project_raw(const Vec& p) const {
    const double rho = std::sqrt(p[0] * p[0] + p[1] * p[1]);
    Vec q(3);
    if (rho == 0.0) {
        q[0] = R_;
    } else {
        q[0] = R_ * p[0] / rho;
        q[1] = R_ * p[1] / rho;
    }
    Vec d = p - q;
    const double n = d.norm();
    if (n == 0.0) {
        Vec r = q;
        r[2] = r_;
        return r;
    }
    return q + (r_ / n) * d;
}

// ---- GraphSurface ----------------------------------------------------

Vec GraphSurface::normal_at(double x, double y) const {
    Vec n{-fx_(x, y), -fy_(x, y), 1.0};
    return (1.0 / n.norm()) * n;
}

Vec GraphSurface::project_raw(const Vec& p) const {
    // Newton on the stationarity of |(x,y,f(x,y)) - p|^2.
    double x = p[0], y = p[1];
    for (int it = 0; it < 50; ++it) {
        const double f = f_(x, y), fx = fx_(x, y), fy = fy_(x, y);
        const double fxx = fxx_(x, y), fxy = fxy_(x, y), fyy = fyy_(x, y);
        const double rz = f - p[2];
        const double g1 = (x - p[0]) + rz * fx;
        const double g2 = (y - p[1]) + rz * fy;
        Mat h(2, 2);
        h(0, 0) = 1 + fx * fx + rz * fxx;
        h(0, 1) = fx * fy + rz * fxy;
        h(1, 0) = h(0, 1);
        h(1, 1) = 1 + fy * fy + rz * fyy;
        Vec step = solve_small(h, Vec{g1, g2});
        x -= step[0];
        y -= step[1];
        if (step.norm() < 1e-14) break;
    }
    return Vec{x, y, f_(x, y)};
}

Vec GraphSurface::tangent_project(const Vec& p, const Vec& v) const {
    Vec n = normal_at(p[0], p[1]);
    return v - dot(v, n) * n;
}

Vec GraphSurface::second_form(const Vec& p, const Vec& x, const Vec& y) const {
    // Classical vector second fundamental form of a graph, negated for the
    // residual convention Delta u + A(u)(grad u, grad u).
    const double px = p[0], py = p[1];
    Vec n = normal_at(px, py);
    const double w2 = 1 + fx_(px, py) * fx_(px, py) + fy_(px, py) * fy_(px, py);
    // Tangent coordinates of x, y in the graph parametrization: the (x1,x2)
    // components of a tangent vector are the parameter components.
    const double a1 = x[0], a2 = x[1];
    const double b1 = y[0], b2 = y[1];
    const double ii = fxx_(px, py) * a1 * b1 + fxy_(px, py) * (a1 * b2 + a2 * b1) +
                      fyy_(px, py) * a2 * b2;
    return (-ii / std::sqrt(w2)) * n;
}

}  // namespace hmlab
