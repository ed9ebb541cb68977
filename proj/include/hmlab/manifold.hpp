#ifndef HMLAB_MANIFOLD_HPP
#define HMLAB_MANIFOLD_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hmlab/errors.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

// Embedded target manifold N in R^k. The sign convention for the second
// fundamental form is fixed so that the interior residual of a harmonic map
// is Delta u + A(u)(grad u, grad u); on the unit sphere A(p)(X,X) = |X|^2 p.
class Manifold {
  public:
    virtual ~Manifold() = default;

    virtual int ambient_dim() const = 0;
    virtual int dim() const = 0;
    virtual double tubular_radius() const = 0;
    virtual double diameter() const = 0;
    virtual std::string name() const = 0;

    // Nearest-point projection. Throws OutsideTubularNeighborhood when the
    // query is too far from the manifold for the projection to be reliable.
    Vec project(const Vec& p) const;

    // Orthogonal projection of v onto Tan(p, N); p must be on the manifold.
    virtual Vec tangent_project(const Vec& p, const Vec& v) const;

    // A(p)(X, Y), normal-valued, symmetric. Default = -D^2 Pi by centered
    // differences of the nearest-point projection.
    virtual Vec second_form(const Vec& p, const Vec& x, const Vec& y) const;

    // Directional derivative of the nearest-point projection, D Pi(p)[v].
    // Overridden with closed forms where available; the default is a
    // centered difference.
    virtual Vec project_jacobian(const Vec& p, const Vec& v) const;

    double membership_tol() const { return 1e-9 * diameter(); }
    bool contains(const Vec& p, double tol) const;
    double distance(const Vec& p) const;

    // Orthonormal basis of Tan(p, N), built by projecting and
    // Gram-Schmidting the ambient coordinate directions.
    std::vector<Vec> tangent_basis(const Vec& p) const;

  protected:
    virtual Vec project_raw(const Vec& p) const = 0;
    // Whether the nearest-point projection is reliable at p. Default: the
    // tubular-radius criterion; round manifolds relax it since only their
    // center is singular.
    virtual bool projection_ok(const Vec& p) const;
};

// Circle of given radius and center in R^2 (or a coordinate circle in R^3).
class Circle final : public Manifold {
  public:
    Circle(Vec center, double radius) : c_(center), r_(radius) {}
    int ambient_dim() const override { return c_.size(); }
    int dim() const override { return 1; }
    double tubular_radius() const override { return r_; }
    double diameter() const override { return 2 * r_; }
    std::string name() const override { return "circle"; }
    Vec tangent_project(const Vec& p, const Vec& v) const override;
    Vec second_form(const Vec& p, const Vec& x, const Vec& y) const override;
    Vec project_jacobian(const Vec& p, const Vec& v) const override;
    double radius() const { return r_; }
    const Vec& center() const { return c_; }

  protected:
    Vec project_raw(const Vec& p) const override;
    bool projection_ok(const Vec& p) const override { return (p - c_).norm() > 1e-12 * r_; }

  private:
    Vec c_;
    double r_;
};

// Circle in a coordinate plane of R^3 (the equator of a sphere, say).
// plane_axis is the ambient coordinate that vanishes on the circle.
class PlanarCircle3 final : public Manifold {
  public:
    PlanarCircle3(Vec center, double radius, int plane_axis)
        : c_(center), r_(radius), axis_(plane_axis) {}
    int ambient_dim() const override { return 3; }
    int dim() const override { return 1; }
    double tubular_radius() const override { return r_; }
    double diameter() const override { return 2 * r_; }
    std::string name() const override { return "planar-circle"; }
    Vec tangent_project(const Vec& p, const Vec& v) const override;
    Vec second_form(const Vec& p, const Vec& x, const Vec& y) const override;

  protected:
    Vec project_raw(const Vec& p) const override;
    bool projection_ok(const Vec& p) const override {
        Vec q = p - c_;
        q[axis_] = 0.0;
        return q.norm() > 1e-12 * r_;
    }

  private:
    Vec c_;
    double r_;
    int axis_;
};

class Sphere final : public Manifold {
  public:
    Sphere(Vec center, double radius) : c_(center), r_(radius) {}
    int ambient_dim() const override { return 3; }
    int dim() const override { return 2; }
    double tubular_radius() const override { return r_; }
    double diameter() const override { return 2 * r_; }
    std::string name() const override { return "sphere"; }
    Vec tangent_project(const Vec& p, const Vec& v) const override;
    Vec second_form(const Vec& p, const Vec& x, const Vec& y) const override;
    Vec project_jacobian(const Vec& p, const Vec& v) const override;
    double radius() const { return r_; }
    const Vec& center() const { return c_; }

  protected:
    Vec project_raw(const Vec& p) const override;
    bool projection_ok(const Vec& p) const override { return (p - c_).norm() > 1e-12 * r_; }

  private:
    Vec c_;
    double r_;
};

// Torus of revolution about the x3-axis, ring radius R, tube radius r.
class Torus final : public Manifold {
  public:
    Torus(double ring, double tube) : R_(ring), r_(tube) {}
    int ambient_dim() const override { return 3; }
    int dim() const override { return 2; }
    double tubular_radius() const override { return r_; }
    double diameter() const override { return 2 * (R_ + r_); }
    std::string name() const override { return "torus"; }

  protected:
    Vec project_raw(const Vec& p) const override;

  private:
    double R_, r_;
};

// Graph surface z = f(x, y) over a bounded patch. The second fundamental
// form comes from the graph Hessian in closed form; the projection is a
// Newton iteration on the nearest-point condition.
class GraphSurface final : public Manifold {
  public:
    using Fn = std::function<double(double, double)>;
    // f plus first and second partials fx, fy, fxx, fxy, fyy.
    GraphSurface(Fn f, Fn fx, Fn fy, Fn fxx, Fn fxy, Fn fyy, double tubular, double diam)
        : f_(f), fx_(fx), fy_(fy), fxx_(fxx), fxy_(fxy), fyy_(fyy), tub_(tubular), diam_(diam) {}
    int ambient_dim() const override { return 3; }
    int dim() const override { return 2; }
    double tubular_radius() const override { return tub_; }
    double diameter() const override { return diam_; }
    std::string name() const override { return "graph-surface"; }
    Vec tangent_project(const Vec& p, const Vec& v) const override;
    Vec second_form(const Vec& p, const Vec& x, const Vec& y) const override;

  protected:
    Vec project_raw(const Vec& p) const override;

  private:
    Vec normal_at(double x, double y) const;
    Fn f_, fx_, fy_, fxx_, fxy_, fyy_;
    double tub_, diam_;
};

// Generic manifold from a user-supplied nearest-point closure. Tangent
// projector and second form fall back to finite differences of the closure.
class GenericManifold final : public Manifold {
  public:
    using Proj = std::function<Vec(const Vec&)>;
    GenericManifold(Proj proj, int ambient, int dim, double tubular, double diam,
                    std::string label = "generic")
        : proj_(std::move(proj)), amb_(ambient), dim_(dim), tub_(tubular), diam_(diam),
          label_(std::move(label)) {}
    int ambient_dim() const override { return amb_; }
    int dim() const override { return dim_; }
    double tubular_radius() const override { return tub_; }
    double diameter() const override { return diam_; }
    std::string name() const override { return label_; }

  protected:
    Vec project_raw(const Vec& p) const override { return proj_(p); }

  private:
    Proj proj_;
    int amb_, dim_;
    double tub_, diam_;
    std::string label_;
};

// Target pair (N, M) with M a submanifold of N carrying the interface
// traces. normal_in_N(a, v) projects onto the orthogonal complement of
// Tan(a, M) inside Tan(a, N).
struct SubmanifoldPair {
    std::shared_ptr<const Manifold> ambient;  // N
    std::shared_ptr<const Manifold> inner;    // M subset of N

    Vec normal_in_n_project(const Vec& a, const Vec& v) const {
        return ambient->tangent_project(a, v) - inner->tangent_project(a, v);
    }
};

// [OP] project_to_manifold / second_form_eval / interface_flux_transfer are
// free functions so the operation surface matches the contracts directly.
Vec project_to_manifold(const Vec& p, const Manifold& m);
Vec second_form_eval(const Vec& p, const Vec& x, const Vec& y, const Manifold& m,
                     double tangent_tol = 1e-7);

}  // namespace hmlab

#endif
