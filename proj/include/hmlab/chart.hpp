#ifndef HMLAB_CHART_HPP
#define HMLAB_CHART_HPP

#include <memory>
#include <vector>

#include "hmlab/manifold.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

// Christoffel symbols at a chart point: gamma(k, i, j), symmetric in (i, j).
struct Christoffel {
    int n = 0;
    std::array<double, 27> g{};
    double& operator()(int k, int i, int j) { return g[(k * n + i) * n + j]; }
    double operator()(int k, int i, int j) const { return g[(k * n + i) * n + j]; }
};

// Local parametrization of a ball in N by B_1^k x B_1^m (assumption C).
// Coordinates split as U = (U1, U2) with k = dim M; when the center lies on
// M the slice U2 = 0 parametrizes M. Built as graph coordinates over the
// tangent space at the center; the angle variant below is the flat chart on
// a circle.
class Chart {
  public:
    virtual ~Chart() = default;

    int k() const { return k_; }
    int m() const { return m_; }
    int coord_dim() const { return k_ + m_; }
    const Vec& center() const { return center_; }
    double scale() const { return scale_; }
    bool m_slice_is_u2_zero() const { return slice_; }

    virtual Vec to_manifold(const Vec& u) const = 0;
    virtual Vec from_manifold(const Vec& p) const = 0;
    // Derivative of to_manifold in coordinate direction i (ambient vector).
    virtual Vec push_basis(const Vec& u, int i) const = 0;

    Mat metric(const Vec& u) const;
    Christoffel christoffel(const Vec& u, double cond_bound = 1e8) const;

  protected:
    Chart(Vec center, double scale, int k, int m, bool slice)
        : center_(center), scale_(scale), k_(k), m_(m), slice_(slice) {}
    Vec center_;
    double scale_;
    int k_, m_;
    bool slice_;
};

// Graph coordinates over Tan(center, N), aligned with Tan(center, M) when a
// submanifold is supplied: U -> Pi_N(center + scale * sum U_i b_i).
class GraphChart final : public Chart {
  public:
    GraphChart(std::shared_ptr<const Manifold> n, std::shared_ptr<const Manifold> m_or_null,
               Vec center, double scale);
    Vec to_manifold(const Vec& u) const override;
    Vec from_manifold(const Vec& p) const override;
    Vec push_basis(const Vec& u, int i) const override;
    const std::vector<Vec>& basis() const { return basis_; }

  private:
    std::shared_ptr<const Manifold> n_;
    std::vector<Vec> basis_;
};

// Arc-length (flat) chart on a circle: the metric is identically 1 and all
// Christoffel symbols vanish.
class AngleChart final : public Chart {
  public:
    AngleChart(std::shared_ptr<const Circle> circle, Vec center);
    Vec to_manifold(const Vec& u) const override;
    Vec from_manifold(const Vec& p) const override;
    Vec push_basis(const Vec& u, int i) const override;

  private:
    std::shared_ptr<const Circle> circle_;
    double theta0_;
};

// [OP] christoffel_eval. Throws SingularMetric past the condition bound.
Christoffel christoffel_eval(const Chart& chart, const Vec& u, double cond_bound = 1e8);

}  // namespace hmlab

#endif
