#ifndef HMLAB_SERIAL_REF_HPP
#define HMLAB_SERIAL_REF_HPP

#include <vector>

#include "hmlab/grid.hpp"

namespace hmlab::serial_ref {

// Straight-line serial implementations of the core kernels, written
// independently of the parallel versions in calculus.cpp. The tests and the
// benchmark compare the two; the parallel kernels must reproduce these
// bitwise (map kernels) or to the ordered-reduction result (sums).

double edge_energy_side(const CoupledField& f, Side s);
std::vector<double> edge_energy_gradient(const CoupledField& f, Side s);
std::vector<double> discrete_gradient(const CoupledField& f, Side s);

}  // namespace hmlab::serial_ref

#endif
