#ifndef HMLAB_ORACLE_HPP
#define HMLAB_ORACLE_HPP

#include <functional>
#include <memory>
#include <vector>

#include "hmlab/elliptic.hpp"
#include "hmlab/grid.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

// Linearized coupled problem of the blow-up limit: two harmonic functions on
// the half balls B_1^+-, valued in the frozen frames at a+ / a- = Phi+(a+),
// coupled on Gamma_1 by v- = P v+ (tangential blocks) and zero Dirichlet
// (normal blocks), with the adjoint flux matching natural in the stencil.
//
// Fields are represented in orthonormal frames: components 0..k-1 span
// Tan(a, M), components k..k+m_n-1 span Nor(a, M) inside Tan(a, N).
struct LinearTransmissionProblem {
    std::shared_ptr<const SplitGrid> grid;  // covers [-1,1]^n; only |x|<1 is used
    int k = 1;    // dim Tan(a, M)
    int m_n = 0;  // dim Nor(a, M) in Tan(a, N)
    Mat coupling;  // P, k x k, in the tangent frames
    // boundary data in frame coordinates, evaluated at Dirichlet nodes
    std::function<Vec(const Vec&)> boundary_plus, boundary_minus;
};

struct TransmissionSolution {
    std::shared_ptr<const SplitGrid> grid;
    int k = 0, m_n = 0;
    // frame components per node, full lattice; plus/minus arrays
    std::vector<double> plus, minus;
    Mat coupling;

    Vec at(Side s, std::int64_t id) const {
        const auto& a = s == Side::Plus ? plus : minus;
        const int d = k + m_n;
        Vec v(d);
        for (int c = 0; c < d; ++c) v[c] = a[static_cast<size_t>(id) * d + c];
        return v;
    }
};

// [OP] solve_coupled_harmonic. Throws SingularCoupling when P is numerically
// singular.
TransmissionSolution solve_coupled_harmonic(const LinearTransmissionProblem& prob);

struct ReflectionReport {
    // residuals of the even-extension identities on the computed solution
    double dirichlet_combination_interior = 0;  // stencil residual of vt- tilde - P vt+
    double dirichlet_combination_on_gamma = 0;  // its boundary values on Gamma_1
    double neumann_residual_minus_comb = 0;     // d_n(v+ - P^t vtilde-) on Gamma_1
    double neumann_residual_plus_comb = 0;      // d_n(v+ + P^t vtilde-) on Gamma_1
    // which combination satisfied the zero-Neumann condition
    bool plus_combination_is_neumann = false;
};

// Discrete check of the reflection decoupling identities; records which of
// the two sign choices carries the zero Neumann data.
ReflectionReport reflection_identities(const TransmissionSolution& sol);

struct BlowupReport {
    std::vector<double> scales;
    std::vector<double> renormalized_energy;   // rho^{2-n} int_{B_rho} |grad u|^2
    std::vector<double> linear_match;          // L2 distance of rescaled u to the oracle
    std::vector<double> trace_residual;        // |v- - P v+| on Gamma after rescaling
    std::vector<double> decay_ratio;           // Theta(r_{j+1}) / Theta(r_j)
    Vec base_plus, base_minus;
};

// [OP] blowup_consistency_check: rescale u about x0 at the given scales,
// subtract the projected base points, normalize, and compare against the
// frozen linear problem with the same boundary data.
BlowupReport blowup_consistency_check(const CoupledField& u, const AdmissibleProblem& p,
                                      const Vec& x0, const std::vector<double>& scales,
                                      int oracle_cells = 8);

// JSON serialization of discrete problems and solutions for the test
// corpus: boundary data is stored sampled at the Dirichlet nodes.
std::string transmission_problem_to_json(const LinearTransmissionProblem& prob);
LinearTransmissionProblem transmission_problem_from_json(const std::string& text);
std::string transmission_solution_to_json(const TransmissionSolution& sol);
TransmissionSolution transmission_solution_from_json(const std::string& text);

}  // namespace hmlab

#endif
