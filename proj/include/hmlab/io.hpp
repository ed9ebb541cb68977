#ifndef HMLAB_IO_HPP
#define HMLAB_IO_HPP

#include <map>
#include <string>
#include <vector>

#include "hmlab/diagnostics.hpp"
#include "hmlab/grid.hpp"
#include "hmlab/ledger.hpp"

namespace hmlab {

// All writers format doubles with %.17g so identical runs produce byte
// identical files.
std::string format_double(double v);

void write_field_csv(const std::string& path, const CoupledField& f);
void read_field_csv(const std::string& path, CoupledField& f);

void write_ledger_csv(const std::string& path, const EnergyLedger& ledger);
void write_trace_csv(const std::string& path, const SplitGrid& g, const TraceField& t);
void write_curve_csv(const std::string& path, const MonotonicityCurve& c);
void write_struwe_csv(const std::string& path, const StruweQuantity& q);
void write_detector_csv(const std::string& path, const SplitGrid& g, const RegularityMap& m);

std::string fnv1a_hex(const std::string& s);

}  // namespace hmlab

#endif
