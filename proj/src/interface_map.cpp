#include "hmlab/interface_map.hpp"

#include <cmath>

namespace hmlab {

Vec InterfaceMap::tubular_jacobian(const Vec& p, const Vec& v) const {
    const double t = 1e-6 * std::max(1.0, mp_->diameter());
    return (1.0 / (2 * t)) * (tubular_forward(p + t * v) - tubular_forward(p - t * v));
}

Vec InterfaceMap::derivative(const Vec& a, const Vec& v) const {
    return mm_->tangent_project(forward(a), tubular_jacobian(a, v));
}

Vec InterfaceMap::adjoint_derivative(const Vec& a, const Vec& w) const {
    Vec out(a.size());
    for (const Vec& e : mp_->tangent_basis(a)) out += dot(w, derivative(a, e)) * e;
    return out;
}

Mat InterfaceMap::frame_matrix(const Vec& a, const std::vector<Vec>& basis_plus,
                               const std::vector<Vec>& basis_minus) const {
    Mat p(static_cast<int>(basis_minus.size()), static_cast<int>(basis_plus.size()));
    for (size_t j = 0; j < basis_plus.size(); ++j) {
        Vec img = derivative(a, basis_plus[j]);
        for (size_t i = 0; i < basis_minus.size(); ++i)
            p(static_cast<int>(i), static_cast<int>(j)) = dot(basis_minus[i], img);
    }
    return p;
}

Vec RotationInterface::rotate(const Vec& p, double ang) const {
    const double c = std::cos(ang), s = std::sin(ang);
    if (p.size() == 2) return Vec{c * p[0] - s * p[1], s * p[0] + c * p[1]};
    // rotation about coordinate axis axis_ in R^3
    const int i = (axis_ + 1) % 3, j = (axis_ + 2) % 3;
    Vec q = p;
    q[i] = c * p[i] - s * p[j];
    q[j] = s * p[i] + c * p[j];
    return q;
}

Vec interface_flux_transfer(const Vec& a_plus, const Vec& w, const InterfaceMap& phi) {
    const Vec b = phi.forward(a_plus);
    const Vec wt = phi.m_minus().tangent_project(b, w);
    return phi.adjoint_derivative(a_plus, wt);
}

}  // namespace hmlab
