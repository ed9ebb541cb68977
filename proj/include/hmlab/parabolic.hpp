#ifndef HMLAB_PARABOLIC_HPP
#define HMLAB_PARABOLIC_HPP

#include <memory>
#include <vector>

#include "hmlab/chart.hpp"
#include "hmlab/elliptic.hpp"
#include "hmlab/ledger.hpp"

namespace hmlab {

struct FlowState {
    double t = 0;
    CoupledField field;
    std::unique_ptr<CoupledField> previous;  // for du/dt estimates

    explicit FlowState(CoupledField f) : field(std::move(f)) {}
};

struct FlowOptions {
    double dt_factor = 0.2;  // dt = dt_factor * h^2
    double t_end = 0.1;
    int frame_stride = 16;   // trajectory snapshot stride (in steps)
    double cg_tol = 1e-11;
    int ledger_stride = 1;
};

// [OP] semi_implicit_step: backward-Euler heat step per side with the
// curvature term explicit, the minus trace slaved through the linearized
// Phi+ at the current trace, and the flux condition natural in the coupled
// stencil; then projection back to the targets.
void semi_implicit_step(FlowState& state, const AdmissibleProblem& p, double dt,
                        double cg_tol = 1e-11);

struct Trajectory {
    std::vector<double> times;
    std::vector<CoupledField> frames;
    double dt = 0;
};

struct FlowResult {
    FlowState state;
    EnergyLedger ledger;
    Trajectory trajectory;
    double initial_flux_compat = 0;  // Theorem-level t=0 flux compatibility residual
    bool flux_compat_flagged = false;
};

FlowResult run_flow(const AdmissibleProblem& p, const CoupledField& u0,
                    const FlowOptions& opts);

// Residual of the t=0 compatibility (du0-/dnu)^T = DPhi+(u0+)[(du0+/dnu)^T].
double initial_flux_compatibility(const CoupledField& u0, const AdmissibleProblem& p);

struct EnergyInequalityReport {
    double min_slack = 0;             // of the exponential-weighted inequality
    double max_identity_residual = 0; // |E(s)-E(t)-dissipation| for static Gamma
    double max_step_increase = 0;     // max over steps of E(t_{k+1})-E(t_k)
};

// [OP] energy_inequality_check over sampled (s, t) pairs of the ledger.
EnergyInequalityReport energy_inequality_check(const EnergyLedger& ledger, double c_const);

// ---- Picard fixed-point solver in a single chart pair -----------------

struct PicardConfig {
    double horizon = 0.05;       // T
    double dt_factor = 0.2;
    double alpha = 0.5;          // Hoelder exponent of the proxy norm
    double theta_target = 0.95;  // contraction ratio considered acceptable
    int max_sweeps = 24;
    double chart_scale = 0.45;   // r0
    double cauchy_tol = 1e-9;
    int hoelder_samples = 2000;
    unsigned seed = 12345;
    double cg_tol = 1e-11;
};

struct PicardResult {
    std::shared_ptr<Chart> chart;
    std::vector<double> times;
    // chart coordinates per time slice: [node * (k+m) + comp], single valued
    // across Gamma with the U2 block zero there
    std::vector<std::vector<double>> slices;
    std::vector<double> sweep_distances;  // proxy-norm Cauchy increments
    std::vector<double> contraction_ratios;
    int sweeps = 0;
    double final_residual = 0;  // discrete nonlinear residual of the limit
    bool contracted = false;
};

// [OP] picard_chart_solve. Throws ChartExit / NoContraction / ConfigError
// (the interface must be an isometry for the shared-chart reduction).
PicardResult picard_chart_solve(const AdmissibleProblem& p, const CoupledField& u0,
                                const PicardConfig& cfg);

// Ambient field reconstructed from a Picard slice.
CoupledField picard_slice_to_field(const AdmissibleProblem& p, const PicardResult& r,
                                   size_t slice);

// The discrete C^{1+alpha,(1+alpha)/2} proxy norm of a chart trajectory.
double picard_proxy_norm(const SplitGrid& g, int dim_u, const std::vector<double>& times,
                         const std::vector<std::vector<double>>& slices, double alpha,
                         int samples, unsigned seed);

}  // namespace hmlab

#endif
