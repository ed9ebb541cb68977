#include "hmlab/runner.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "hmlab/diagnostics.hpp"
#include "hmlab/io.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "hmlab 0.1.0";

void write_manifest(const Scenario& s, const std::string& out_dir, RunOutputs& out) {
    json j;
    j["scenario"] = s.name;
    j["version"] = kVersion;
    j["config_hash"] = fnv1a_hex(canonical_config(s));
    j["seed"] = s.seed;
    j["threads"] = num_threads();
    j["grid"] = {{"dim", s.dim}, {"h", s.h}, {"extent", s.extent},
                 {"distortion_constant", s.distortion_constant}};
    json m;
    for (const auto& [k, v] : out.measured) m[k] = v;
    j["measured"] = m;
    j["outputs"] = out.files;
    const std::string path = out_dir + "/manifest.json";
    std::ofstream f(path);
    if (!f) throw ConfigError("cannot write manifest: " + path);
    f << j.dump(2) << '\n';
    out.files.push_back("manifest.json");
}

CoupledField initialize(const Scenario& s, const AdmissibleProblem& p) {
    return s.init == InitKind::Harmonic ? initialize_admissible(p)
                                        : initialize_homogeneous(p);
}

void run_diagnostics(const Scenario& s, const std::string& out_dir, RunOutputs& out) {
    const CoupledField& u = *out.field;
    const Manifold* nplus = out.problem.target_plus.ambient.get();
    const Manifold* nminus = out.problem.target_minus.ambient.get();
    if (s.monotonicity) {
        const MonotonicityCurve curve =
            static_monotonicity_curve(u, s.monotonicity->center, s.monotonicity->radii,
                                      s.distortion_constant, nplus, nminus);
        write_curve_csv(out_dir + "/monotonicity.csv", curve);
        out.files.push_back("monotonicity.csv");
        out.measured["mono_violation"] = curve.max_violation;
        out.measured["mono_deficit_violation"] = curve.max_deficit_violation;
        double lo = 1e300, hi = -1e300;
        for (double v : curve.theta) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out.measured["mono_theta_min"] = lo;
        out.measured["mono_theta_max"] = hi;
    }
    if (s.detect) {
        const RegularityMap map = singular_set_detect(u, s.detect->scale, s.detect->eps0,
                                                      s.detect->include_interior, 0.5,
                                                      nplus, nminus);
        write_detector_csv(out_dir + "/detect.csv", u.grid(), map);
        out.files.push_back("detect.csv");
        out.measured["flagged_count"] = static_cast<double>(map.flagged_nodes().size());
    }
    if (s.decay) {
        out.measured["decay_ratio"] = energy_decay_ratio(u, s.decay->center, s.decay->r,
                                                         s.decay->factor, nplus, nminus);
    }
    if (s.struwe && out.trajectory) {
        const double t0 = s.struwe->t0 > 0 ? s.struwe->t0 : out.trajectory->times.back();
        const StruweQuantity q =
            struwe_curve(*out.trajectory, s.struwe->center, t0, s.struwe->radii);
        write_struwe_csv(out_dir + "/struwe.csv", q);
        out.files.push_back("struwe.csv");
        out.measured["struwe_violation"] = q.max_violation;
        out.measured["struwe_mass_defect"] = q.max_mass_defect;
        out.measured["struwe_e_min"] = q.values.empty() ? 0.0 : q.values.front();
        out.measured["struwe_e_max"] = q.values.empty() ? 0.0 : q.values.back();
    }
}

void finish_common(const Scenario& s, const std::string& out_dir, RunOutputs& out) {
    const AdmissibilityReport adm = check_admissible(*out.field, out.problem);
    out.measured["adm_dist_n"] = adm.max_dist_n;
    out.measured["adm_dist_m"] = adm.max_dist_m;
    out.measured["adm_matching"] = adm.max_matching;
    out.measured["flux_residual_max"] = flux_residual_max(*out.field, out.problem);
    out.measured["discrete_energy"] = discrete_energy(*out.field);
    out.measured["edge_energy"] = edge_energy(*out.field);

    if (s.write_fields) {
        write_field_csv(out_dir + "/field.csv", *out.field);
        out.files.push_back("field.csv");
        const TraceField fr = flux_residual(*out.field, out.problem);
        write_trace_csv(out_dir + "/flux_residual.csv", *out.problem.grid, fr);
        out.files.push_back("flux_residual.csv");
    }
    if (out.ledger) {
        write_ledger_csv(out_dir + "/ledger.csv", *out.ledger);
        out.files.push_back("ledger.csv");
    }
    run_diagnostics(s, out_dir, out);
    write_manifest(s, out_dir, out);
}

}  // namespace

RunOutputs run_scenario(const Scenario& s, const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunOutputs out;
    out.problem = build_problem(s);

    switch (s.run) {
        case RunKind::Minimize: {
            // cascadic warm start: solve the same scenario on coarser grids
            // and prolong, then run the configured grid to tolerance
            std::vector<double> levels{s.h};
            while (s.cascade_from_h > 0 && levels.back() * 2 <= s.cascade_from_h * 1.0001)
                levels.push_back(levels.back() * 2);
            std::reverse(levels.begin(), levels.end());

            std::unique_ptr<CoupledField> u;
            AdmissibleProblem level_problem;
            for (size_t li = 0; li < levels.size(); ++li) {
                level_problem = li + 1 == levels.size()
                                    ? out.problem
                                    : build_problem_with_h(s, levels[li]);
                CoupledField u0 = u ? prolong(*u, level_problem)
                                    : initialize(s, level_problem);
                MinimizeResult r = minimize(level_problem, u0, s.minimize_opts);
                u = std::make_unique<CoupledField>(std::move(r.field));
                if (li + 1 == levels.size()) {
                    out.ledger = std::move(r.ledger);
                    out.measured["iterations"] = r.iterations;
                    out.measured["converged"] = r.converged ? 1.0 : 0.0;
                    out.measured["final_gradient_norm"] = r.final_gradient_norm;
                }
            }
            out.field = std::make_shared<CoupledField>(std::move(*u));
            break;
        }
        case RunKind::Flow: {
            const CoupledField u0 = initialize(s, out.problem);
            FlowResult r = run_flow(out.problem, u0, s.flow_opts);
            out.field = std::make_shared<CoupledField>(std::move(r.state.field));
            out.ledger = std::move(r.ledger);
            out.trajectory = std::move(r.trajectory);
            if (s.write_fields) {
                // trajectory snapshots, one CSV per stored frame
                std::ofstream index(out_dir + "/trajectory.csv");
                index << "frame,t,file\n";
                for (size_t i = 0; i < out.trajectory->frames.size(); ++i) {
                    char name[32];
                    std::snprintf(name, sizeof(name), "frame_%05zu.csv", i);
                    write_field_csv(out_dir + "/" + name, out.trajectory->frames[i]);
                    index << i << ',' << format_double(out.trajectory->times[i]) << ','
                          << name << '\n';
                    out.files.push_back(name);
                }
                out.files.push_back("trajectory.csv");
            }
            out.measured["initial_flux_compat"] = r.initial_flux_compat;
            out.measured["flux_compat_flagged"] = r.flux_compat_flagged ? 1.0 : 0.0;
            const EnergyInequalityReport rep = energy_inequality_check(*out.ledger, 0.0);
            out.measured["min_slack"] = rep.min_slack;
            out.measured["max_identity_residual"] = rep.max_identity_residual;
            out.measured["max_step_increase"] = rep.max_step_increase;
            break;
        }
        case RunKind::Picard: {
            const CoupledField u0 = initialize(s, out.problem);
            PicardResult r = picard_chart_solve(out.problem, u0, s.picard_cfg);
            out.field = std::make_shared<CoupledField>(
                picard_slice_to_field(out.problem, r, r.slices.size() - 1));
            out.measured["picard_sweeps"] = r.sweeps;
            out.measured["picard_residual"] = r.final_residual;
            out.measured["picard_contracted"] = r.contracted ? 1.0 : 0.0;
            if (!r.contraction_ratios.empty()) {
                out.measured["picard_ratio_first"] = r.contraction_ratios.front();
                double worst = 0;
                for (double v : r.contraction_ratios) worst = std::max(worst, v);
                out.measured["picard_ratio_max"] = worst;
            }
            // contraction report
            {
                std::ofstream f(out_dir + "/picard.csv");
                f << "sweep,distance,ratio\n";
                for (size_t i = 0; i < r.sweep_distances.size(); ++i) {
                    f << (i + 1) << ',' << format_double(r.sweep_distances[i]) << ',';
                    f << (i > 0 ? format_double(r.contraction_ratios[i - 1]) : "");
                    f << '\n';
                }
                out.files.push_back("picard.csv");
            }
            out.picard = std::move(r);
            break;
        }
        case RunKind::Diagnose: {
            out.field = std::make_shared<CoupledField>(initialize(s, out.problem));
            break;
        }
    }
    finish_common(s, out_dir, out);
    return out;
}

RunOutputs diagnose_field(const Scenario& s, const std::string& field_csv,
                          const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunOutputs out;
    out.problem = build_problem(s);
    auto f = std::make_shared<CoupledField>(*out.problem.grid,
                                            out.problem.target_plus.ambient->ambient_dim());
    read_field_csv(field_csv, *f);
    out.field = f;
    finish_common(s, out_dir, out);
    return out;
}

}  // namespace hmlab
