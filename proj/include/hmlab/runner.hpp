#ifndef HMLAB_RUNNER_HPP
#define HMLAB_RUNNER_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>

#include "hmlab/scenario.hpp"

namespace hmlab {

struct RunOutputs {
    AdmissibleProblem problem;
    std::shared_ptr<CoupledField> field;  // final field of the run
    std::optional<EnergyLedger> ledger;
    std::optional<Trajectory> trajectory;
    std::optional<PicardResult> picard;
    std::map<std::string, double> measured;
    std::vector<std::string> files;
};

// Execute a scenario and write all artifacts (CSV data + manifest.json)
// under out_dir. Pure function of (scenario, seed, threads): identical
// inputs produce byte-identical outputs.
RunOutputs run_scenario(const Scenario& s, const std::string& out_dir);

// Post-hoc diagnostics on a saved field (the `diagnose` CLI verb).
RunOutputs diagnose_field(const Scenario& s, const std::string& field_csv,
                          const std::string& out_dir);

}  // namespace hmlab

#endif
