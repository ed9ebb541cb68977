#ifndef HMLAB_SCENARIO_HPP
#define HMLAB_SCENARIO_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hmlab/elliptic.hpp"
#include "hmlab/parabolic.hpp"

namespace hmlab {

enum class RunKind { Minimize, Flow, Picard, Diagnose };
enum class InitKind { Harmonic, Homogeneous };

// One scenario = one fully specified run: grid, targets, interface map,
// named boundary data, run kind, tolerances. Parsed from the JSON config.
struct Scenario {
    std::string name = "unnamed";
    RunKind run = RunKind::Minimize;
    InitKind init = InitKind::Harmonic;
    unsigned seed = 0;

    // grid
    int dim = 1;
    double h = 1.0 / 16;
    double extent = 1.0;
    double distortion_constant = 0.0;

    // targets: circle | sphere-equator | sphere-full
    std::string target_kind = "circle";
    double radius = 1.0;

    // interface: identity | rotation | scaling
    std::string interface_kind = "identity";
    double beta = 0.0;
    double lambda = 1.0;

    // boundary: constant | angles | angle-linear | radial-projection |
    // geodesic-profile
    std::string boundary_form = "constant";
    double theta_plus = 0.0, theta_minus = 0.0;   // angles / geodesic-profile
    double lin_a0 = 0.0;                          // angle-linear
    std::vector<double> lin_a;                    // slope vector
    double lin_bn = 0.0;                          // minus-side normal slope / bilinear coeff
    double wave_amp = 0.0, wave_k = 2.0;          // harmonic wave of angle-harmonic

    MinimizeOptions minimize_opts;
    double cascade_from_h = 0.0;  // 0 = no cascade
    FlowOptions flow_opts;
    PicardConfig picard_cfg;

    // diagnostics requests (optional)
    struct Mono {
        Vec center;
        std::vector<double> radii;
    };
    std::optional<Mono> monotonicity;
    struct Detect {
        double scale = 0.25;
        double eps0 = 0.5;
        bool include_interior = false;
    };
    std::optional<Detect> detect;
    struct Decay {
        Vec center;
        double r = 0.4;
        double factor = 0.5;
    };
    std::optional<Decay> decay;
    struct Struwe {
        Vec center;
        double t0 = 0.0;  // 0 = end of run
        std::vector<double> radii;
    };
    std::optional<Struwe> struwe;

    bool write_fields = true;
    double constraint_tol = 1e-8;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);
std::string canonical_config(const Scenario& s);

// Instantiate the geometry and the admissible problem of a scenario.
AdmissibleProblem build_problem(const Scenario& s);
// Same problem on a different grid spacing (cascade levels).
AdmissibleProblem build_problem_with_h(const Scenario& s, double h);

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> messages;
    double boundary_membership = 0;
    double edge_compatibility = 0;
    double initial_flux_compat = -1;  // flow runs only; -1 = not checked
};

ValidationReport validate_scenario(const Scenario& s);

}  // namespace hmlab

#endif
