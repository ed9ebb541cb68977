#ifndef HMLAB_ELLIPTIC_HPP
#define HMLAB_ELLIPTIC_HPP

#include <functional>
#include <memory>
#include <optional>

#include "hmlab/calculus.hpp"
#include "hmlab/grid.hpp"
#include "hmlab/interface_map.hpp"
#include "hmlab/ledger.hpp"
#include "hmlab/manifold.hpp"

namespace hmlab {

struct MinimizeOptions {
    int max_iterations = 200000;
    double energy_tol = 1e-12;    // relative decrease stop
    double gradient_tol = 1e-9;   // sup norm of the mass-normalized projected gradient
    bool backtracking = true;     // false = fixed step tau0
    double armijo_c = 1e-4;
    double tau0_factor = 0.25;    // initial step = tau0_factor * h^2
    double constraint_tol = 1e-10;
    int ledger_stride = 100;
};

// The admissible class: targets, interface map, and Dirichlet data g on the
// outer boundary given as closures of the node position.
struct AdmissibleProblem {
    std::shared_ptr<const SplitGrid> grid;
    SubmanifoldPair target_plus, target_minus;
    std::shared_ptr<const InterfaceMap> interface;
    std::function<Vec(const Vec&)> g_plus, g_minus;

    const SubmanifoldPair& target(Side s) const {
        return s == Side::Plus ? target_plus : target_minus;
    }
    const std::function<Vec(const Vec&)>& g(Side s) const {
        return s == Side::Plus ? g_plus : g_minus;
    }

    // Max over Sigma-edge nodes of |Phi+(g+) - g-| (Eq-level compatibility of
    // the boundary data at Sigma), plus the worst membership defect of g.
    double compatibility_residual() const;
    double boundary_membership_residual() const;
};

struct AdmissibilityReport {
    double max_dist_n = 0;         // worst distance of interior values to N+-
    double max_dist_m = 0;         // worst distance of traces to M+-
    double max_matching = 0;       // max |trace- - Phi+(trace+)| over Gamma
    bool within(double tol) const {
        return max_dist_n <= tol && max_dist_m <= tol && max_matching <= tol;
    }
};

AdmissibilityReport check_admissible(const CoupledField& u, const AdmissibleProblem& p);

// Dirichlet boundary values applied to the field (Sigma and Sigma-edge).
void apply_boundary_data(CoupledField& u, const AdmissibleProblem& p);

// Componentwise harmonic fill of the free nodes of one side; fixed nodes
// keep their current values.
void harmonic_fill(const SplitGrid& g, Side s, int k, std::vector<double>& values,
                   const std::vector<std::int64_t>& free_nodes, double rel_tol = 1e-12);

// [OP] initialize_admissible: harmonic extension of g+ along Gamma projected
// to M+, minus trace slaved through Phi+, interiors filled harmonically and
// projected to the targets. Throws ProjectionFailure when a fill leaves the
// tubular neighborhood.
CoupledField initialize_admissible(const AdmissibleProblem& p);

// Degree-zero extension of g from the outer boundary (the coarse homotopy
// initializer callers fall back to for large boundary oscillation).
CoupledField initialize_homogeneous(const AdmissibleProblem& p);

struct MinimizeResult {
    CoupledField field;
    EnergyLedger ledger;
    bool converged = false;
    int iterations = 0;
    double final_gradient_norm = 0;
};

// [OP] minimize: projected gradient descent with Armijo backtracking. The
// Gamma unknowns are the plus traces; the minus trace is always Phi+(m).
MinimizeResult minimize(const AdmissibleProblem& p, const CoupledField& u0,
                        const MinimizeOptions& opts);

// Prolongate a field to a twice-finer grid (used for cascadic warm starts).
CoupledField prolong(const CoupledField& coarse, const AdmissibleProblem& fine_problem);

// [OP] radial_comparison: degree-zero replacement of u inside B_r(x0).
CoupledField radial_comparison(const CoupledField& u, const AdmissibleProblem& p,
                               const Vec& x0, double r);

// [OP] flux_residual: per Gamma node, (du+/dnu)^T - (DPhi+)^t (du-/dnu)^T in
// the tangent space of M+ at the plus trace.
TraceField flux_residual(const CoupledField& u, const AdmissibleProblem& p);
double flux_residual_max(const CoupledField& u, const AdmissibleProblem& p);

// ---- Boundary extension constructions --------------------------------

struct DiscExtensionInput {
    std::function<Vec(double)> eta_plus;   // theta in [0, pi]
    std::function<Vec(double)> eta_minus;  // theta in [-pi, 0]
    SubmanifoldPair target_plus, target_minus;
    std::shared_ptr<const InterfaceMap> interface;
    double h = 1.0 / 32;
    double eps = 0.1;     // epsilon of the extension estimate
    double q = 2.0;       // exponent
    double delta = 0.05;  // smallness threshold
};

struct DiscExtensionResult {
    std::shared_ptr<SplitGrid> grid;
    std::unique_ptr<CoupledField> field;
    double disc_energy_plus = 0, disc_energy_minus = 0;
    double trace_dirichlet_plus = 0, trace_dirichlet_minus = 0;  // int |d_theta eta|^2
    double trace_deviation_plus = 0, trace_deviation_minus = 0;  // L^2 + endpoint terms
    double measured_constant_plus = 0, measured_constant_minus = 0;
};

// [OP] interpolation_extension_2d (the n = 2 case of the boundary extension
// lemma): linear interpolation along the diameter, harmonic fill of the half
// discs, projection to the targets. Throws OscillationTooLarge.
DiscExtensionResult interpolation_extension_2d(const DiscExtensionInput& in);

struct CylinderExtensionInput {
    double delta = 0.25;
    int cells = 12;  // lattice cells per delta
    // Cross-section coordinates are (y, s) with s the split coordinate; the
    // cylinder axis t is the middle grid axis. Closures take (y, s).
    std::function<Vec(double, double)> bottom_plus, bottom_minus;  // t = -delta
    std::function<Vec(double, double)> top_plus, top_minus;        // t = +delta
    std::function<Vec(double, double)> lateral_plus, lateral_minus;  // on |(y,s)| = delta
    SubmanifoldPair target_plus, target_minus;
    std::shared_ptr<const InterfaceMap> interface;
};

struct CylinderExtensionResult {
    std::shared_ptr<SplitGrid> grid;  // coordinates ordered (y, t, s)
    std::unique_ptr<CoupledField> field;
    double extension_energy_plus = 0, extension_energy_minus = 0;
    double e_bottom_plus = 0, e_bottom_minus = 0;
    double e_top_plus = 0, e_top_minus = 0;
    double e_lateral_plus = 0, e_lateral_minus = 0;
    double measured_c_plus = 0, measured_c_minus = 0;
    double max_interface_mismatch = 0;  // |u- - Phi+(u+)| over slab nodes
};

// [OP] homogeneous_cylinder_extension: degree-zero extension through the
// bi-Lipschitz ball-to-cylinder gauge x -> x / ||x||_cyl.
CylinderExtensionResult homogeneous_cylinder_extension(const CylinderExtensionInput& in);

}  // namespace hmlab

#endif
