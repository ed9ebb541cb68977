#ifndef HMLAB_DIAGNOSTICS_HPP
#define HMLAB_DIAGNOSTICS_HPP

#include <vector>

#include "hmlab/grid.hpp"
#include "hmlab/manifold.hpp"
#include "hmlab/parabolic.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

// rho^{2-n} * int_{B_rho(x0) cap Omega} |grad u|^2 (both sides), computed
// by radial shell integration of interpolated sphere samples with a
// scale-invariant core model. When the targets are supplied the samples are
// projected back onto them, which removes the chord bias of multilinear
// interpolation of manifold-valued data.
double renormalized_ball_energy(const CoupledField& u, const Vec& x0, double rho,
                                const Manifold* proj_plus = nullptr,
                                const Manifold* proj_minus = nullptr);

struct MonotonicityCurve {
    Vec center;
    std::vector<double> radii;
    std::vector<double> theta;         // e^{Cr} r^{2-n} (int+ + int-)
    std::vector<double> deficit;       // radial-derivative annulus term per gap
    double distortion_constant = 0;
    double max_violation = 0;          // max over gaps of theta(r1) - theta(r2), r1<r2
    double max_deficit_violation = 0;  // max of deficit - (theta(r2)-theta(r1))
};

// [OP] static_monotonicity_curve (boundary monotonicity of minimizers).
MonotonicityCurve static_monotonicity_curve(const CoupledField& u, const Vec& x0,
                                            const std::vector<double>& radii,
                                            double c_distortion,
                                            const Manifold* proj_plus = nullptr,
                                            const Manifold* proj_minus = nullptr);

struct StruweQuantity {
    Vec center;
    double t0 = 0;
    std::vector<double> radii;          // R
    std::vector<double> values;         // E(u; (x0,t0), R) at slice nearest t0 - R^2
    std::vector<double> slice_times;
    std::vector<double> kernel_mass;    // discrete Gaussian mass per radius
    std::vector<double> rhs;            // measured |x.grad u - 2(t0-t) du/dt|^2 term
    double max_mass_defect = 0;
    double max_violation = 0;           // max of E(R_i) - E(R_{i+1}) over increasing radii
};

// [OP] struwe_curve on a stored trajectory. Throws InsufficientHistory.
StruweQuantity struwe_curve(const Trajectory& traj, const Vec& x0, double t0,
                            const std::vector<double>& radii);

struct RegularityMap {
    double scale = 0;
    double eps0 = 0;
    std::vector<std::int64_t> nodes;     // gamma nodes (plus interior when requested)
    std::vector<double> energy;          // renormalized energy at the scale
    std::vector<unsigned char> flagged;  // energy > eps0^2
    std::vector<double> hoelder;         // empirical quotient on unflagged nodes
    std::vector<std::int64_t> flagged_nodes() const {
        std::vector<std::int64_t> out;
        for (size_t i = 0; i < nodes.size(); ++i)
            if (flagged[i]) out.push_back(nodes[i]);
        return out;
    }
};

// [OP] singular_set_detect: small-energy criterion at scale r with threshold
// eps0^2 over the Gamma nodes (and interior nodes when include_interior).
RegularityMap singular_set_detect(const CoupledField& u, double r, double eps0,
                                  bool include_interior = false, double hoelder_alpha = 0.5,
                                  const Manifold* proj_plus = nullptr,
                                  const Manifold* proj_minus = nullptr);

// [OP] energy_decay_ratio: Theta(theta_factor * r) / Theta(r); 0 when both
// vanish.
double energy_decay_ratio(const CoupledField& u, const Vec& x0, double r,
                          double theta_factor, const Manifold* proj_plus = nullptr,
                          const Manifold* proj_minus = nullptr);

}  // namespace hmlab

#endif
