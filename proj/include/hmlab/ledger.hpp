#ifndef HMLAB_LEDGER_HPP
#define HMLAB_LEDGER_HPP

#include <vector>

namespace hmlab {

// Sampled diagnostic quantities along a run (descent iterates or flow time).
// dissipation[i] is the integral of |du/dt|^2 over (t[i-1], t[i]]; slack is
// whatever inequality deficit the producing module records.
struct EnergyLedger {
    std::vector<double> t;
    std::vector<double> energy;
    std::vector<double> dissipation;
    std::vector<double> slack;
    double moving_interface_constant = 0.0;  // C of the energy inequality; 0 for static Gamma

    void push(double time, double e, double d = 0.0, double s = 0.0) {
        t.push_back(time);
        energy.push_back(e);
        dissipation.push_back(d);
        slack.push_back(s);
    }
    size_t size() const { return t.size(); }
};

}  // namespace hmlab

#endif
