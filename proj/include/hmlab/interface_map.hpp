#ifndef HMLAB_INTERFACE_MAP_HPP
#define HMLAB_INTERFACE_MAP_HPP

#include <memory>
#include <string>

#include "hmlab/manifold.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

// Diffeomorphism Phi+ : M+ -> M- with derivative, ambient adjoint, and a
// tubular extension to geodesic balls around M+. The adjoint is computed
// with respect to the ambient Euclidean inner product restricted to the
// tangent spaces.
class InterfaceMap {
  public:
    InterfaceMap(std::shared_ptr<const Manifold> m_plus, std::shared_ptr<const Manifold> m_minus,
                 bool isometry)
        : mp_(std::move(m_plus)), mm_(std::move(m_minus)), isometry_(isometry) {}
    virtual ~InterfaceMap() = default;

    virtual Vec forward(const Vec& a) const = 0;   // Phi+
    virtual Vec inverse(const Vec& b) const = 0;   // Phi-
    virtual std::string name() const = 0;

    // D Phi+(a)[v] for v in Tan(a, M+). Default: chain rule through the
    // tubular extension, re-projected onto Tan(Phi+(a), M-).
    virtual Vec derivative(const Vec& a, const Vec& v) const;

    // (D Phi+(a))^t w for w in Tan(Phi+(a), M-): assembled over an
    // orthonormal tangent basis of M+ at a.
    virtual Vec adjoint_derivative(const Vec& a, const Vec& w) const;

    // Extension of Phi+ to the ambient tubular neighborhood (assumption B).
    virtual Vec tubular_forward(const Vec& p) const = 0;

    // Ambient Jacobian of the tubular extension; used to linearize the
    // matching constraint in the coupled solvers.
    virtual Vec tubular_jacobian(const Vec& p, const Vec& v) const;

    bool is_isometry() const { return isometry_; }
    const Manifold& m_plus() const { return *mp_; }
    const Manifold& m_minus() const { return *mm_; }

    // Coupling matrix of the derivative in given orthonormal tangent frames.
    Mat frame_matrix(const Vec& a, const std::vector<Vec>& basis_plus,
                     const std::vector<Vec>& basis_minus) const;

  protected:
    std::shared_ptr<const Manifold> mp_, mm_;
    bool isometry_;
};

// Phi+ = identity, M+ = M-.
class IdentityInterface final : public InterfaceMap {
  public:
    explicit IdentityInterface(std::shared_ptr<const Manifold> m)
        : InterfaceMap(m, m, true) {}
    Vec forward(const Vec& a) const override { return a; }
    Vec inverse(const Vec& b) const override { return b; }
    Vec derivative(const Vec&, const Vec& v) const override { return v; }
    Vec adjoint_derivative(const Vec&, const Vec& w) const override { return w; }
    Vec tubular_forward(const Vec& p) const override { return p; }
    Vec tubular_jacobian(const Vec&, const Vec& v) const override { return v; }
    std::string name() const override { return "identity"; }
};

// Rotation by beta. In R^2 a plane rotation; in R^3 a rotation about the
// given coordinate axis (the equator setup uses axis = 2).
class RotationInterface final : public InterfaceMap {
  public:
    RotationInterface(std::shared_ptr<const Manifold> m_plus,
                      std::shared_ptr<const Manifold> m_minus, double beta, int axis = 2)
        : InterfaceMap(std::move(m_plus), std::move(m_minus), true), beta_(beta), axis_(axis) {}
    Vec forward(const Vec& a) const override { return rotate(a, beta_); }
    Vec inverse(const Vec& b) const override { return rotate(b, -beta_); }
    Vec derivative(const Vec&, const Vec& v) const override { return rotate(v, beta_); }
    Vec adjoint_derivative(const Vec& a, const Vec& w) const override {
        return mp_->tangent_project(a, rotate(w, -beta_));
    }
    Vec tubular_forward(const Vec& p) const override { return rotate(p, beta_); }
    Vec tubular_jacobian(const Vec&, const Vec& v) const override { return rotate(v, beta_); }
    std::string name() const override { return "rotation"; }
    double beta() const { return beta_; }

  private:
    Vec rotate(const Vec& p, double ang) const;
    double beta_;
    int axis_;
};

// Phi+(p) = lambda p, mapping a circle of radius r to a circle of radius
// lambda r. D Phi = lambda Id on the tangent line; not an isometry.
class ScalingInterface final : public InterfaceMap {
  public:
    ScalingInterface(std::shared_ptr<const Manifold> m_plus,
                     std::shared_ptr<const Manifold> m_minus, double lambda)
        : InterfaceMap(std::move(m_plus), std::move(m_minus), lambda == 1.0), lam_(lambda) {}
    Vec forward(const Vec& a) const override { return lam_ * a; }
    Vec inverse(const Vec& b) const override { return (1.0 / lam_) * b; }
    Vec derivative(const Vec&, const Vec& v) const override { return lam_ * v; }
    Vec tubular_forward(const Vec& p) const override { return lam_ * p; }
    Vec tubular_jacobian(const Vec&, const Vec& v) const override { return lam_ * v; }
    std::string name() const override { return "scaling"; }

  private:
    double lam_;
};

// [OP] interface_flux_transfer: (D Phi+(a))^t applied to the tangential
// projection of w at Phi+(a).
Vec interface_flux_transfer(const Vec& a_plus, const Vec& w, const InterfaceMap& phi);

}  // namespace hmlab

#endif
