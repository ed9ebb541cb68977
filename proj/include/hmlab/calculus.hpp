#ifndef HMLAB_CALCULUS_HPP
#define HMLAB_CALCULUS_HPP

#include <cstdint>
#include <vector>

#include "hmlab/grid.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

// Per-node gradient of one side of a coupled field: second-order central
// differences in the interior, one-sided second-order at the outer boundary
// and at Gamma (each side differentiates its own trace). Layout:
// out[(id * n + axis) * k + comp].
std::vector<double> discrete_gradient(const CoupledField& f, Side s);
std::vector<double> discrete_gradient_raw(const SplitGrid& g, Side s, int k,
                                          const std::vector<double>& a);

// Gradient row (axis) at a single node as a k-vector.
Vec gradient_row(const SplitGrid& g, const std::vector<double>& grad, int k,
                 std::int64_t id, int axis);

// Trapezoidal quadrature of (1/2)|grad u|^2 over both sides, using the
// per-node gradients above. This is the reported diagnostic energy.
double discrete_energy(const CoupledField& f);
double discrete_energy_side(const CoupledField& f, Side s);

// Dirichlet energy as a sum over lattice edges; this is the objective the
// descent and the flow dissipate, and its variational derivative is the
// stencil Laplacian below.
double edge_energy(const CoupledField& f);
double edge_energy_side(const CoupledField& f, Side s);

// Weight of the edge (id, id + e_axis) in the side's edge energy; zero if
// the edge leaves the side's closed domain.
double edge_weight(const SplitGrid& g, Side s, std::int64_t id, int axis);

// Variational derivative r = dE_edge/du at every node of the side's closed
// domain (ambient k-vector per node, same layout as the field). Gamma rows
// give the one-sided half-cell contribution of this side only.
std::vector<double> edge_energy_gradient(const CoupledField& f, Side s);
void edge_energy_gradient_raw(const SplitGrid& g, Side s, int k, const std::vector<double>& a,
                              std::vector<double>& out);

// One-sided second-order normal derivative du/dnu at Gamma nodes, nu = +e_n
// (pointing into Omega+), taken from the indicated side.
TraceField normal_derivative_at_interface(const CoupledField& f, Side s);

// Multilinear interpolation of one side's values at a point of the side's
// closed domain.
Vec side_interpolate(const CoupledField& f, Side s, const Vec& y);

struct BallRestriction {
    bool degenerate = false;
    std::vector<std::int64_t> inside_plus, inside_minus;
    TraceField sphere_plus, sphere_minus;  // Carrier::Sphere samples
};

// [OP] ball_restriction. Throws BallExceedsDomain.
BallRestriction ball_restriction(const CoupledField& f, const Vec& center, double r);

// Smoothed ball indicator for radial quadratures: 1 inside, 0 outside, one
// cell of linear ramp at the sphere.
double ball_indicator(const Vec& x, const Vec& center, double r, double h);

void require_ball_inside(const SplitGrid& g, const Vec& center, double r);

}  // namespace hmlab

#endif
