#include "hmlab/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hmlab/errors.hpp"

namespace hmlab {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open for writing: " + path);
    return out;
}

void write_coords(std::ostream& out, const SplitGrid& g, std::int64_t id) {
    const Vec x = g.position(id);
    for (int d = 0; d < 3; ++d) {
        out << ',';
        out << format_double(d < g.dim() ? x[d] : 0.0);
    }
}

}  // namespace

void write_field_csv(const std::string& path, const CoupledField& f) {
    const SplitGrid& g = f.grid();
    std::ofstream out = open_out(path);
    out << "node,x0,x1,x2,side";
    for (int c = 0; c < f.components(); ++c) out << ",c" << c;
    out << '\n';
    for (Side s : {Side::Plus, Side::Minus}) {
        for (std::int64_t id : g.side_nodes(s)) {
            out << id;
            write_coords(out, g, id);
            out << ',' << (s == Side::Plus ? "plus" : "minus");
            const Vec v = f.value(s, id);
            for (int c = 0; c < f.components(); ++c) out << ',' << format_double(v[c]);
            out << '\n';
        }
    }
}

void read_field_csv(const std::string& path, CoupledField& f) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open field csv: " + path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        const std::int64_t id = std::stoll(tok);
        for (int d = 0; d < 3; ++d) std::getline(ss, tok, ',');
        std::getline(ss, tok, ',');
        const Side s = tok == "plus" ? Side::Plus : Side::Minus;
        Vec v(f.components());
        for (int c = 0; c < f.components(); ++c) {
            std::getline(ss, tok, ',');
            v[c] = std::stod(tok);
        }
        if (id < 0 || id >= f.grid().num_nodes())
            throw ConfigError("field csv node index out of range");
        f.set_value(s, id, v);
    }
}

void write_ledger_csv(const std::string& path, const EnergyLedger& ledger) {
    std::ofstream out = open_out(path);
    out << "t,energy,dissipation,slack\n";
    for (size_t i = 0; i < ledger.size(); ++i)
        out << format_double(ledger.t[i]) << ',' << format_double(ledger.energy[i]) << ','
            << format_double(ledger.dissipation[i]) << ',' << format_double(ledger.slack[i])
            << '\n';
}

void write_trace_csv(const std::string& path, const SplitGrid& g, const TraceField& t) {
    std::ofstream out = open_out(path);
    out << "node,x0,x1,x2,norm";
    const int k = t.values.empty() ? 0 : t.values.front().size();
    for (int c = 0; c < k; ++c) out << ",v" << c;
    out << '\n';
    for (size_t i = 0; i < t.values.size(); ++i) {
        if (!t.nodes.empty()) {
            out << t.nodes[i];
            write_coords(out, g, t.nodes[i]);
        } else {
            out << i;
            for (int d = 0; d < 3; ++d)
                out << ',' << format_double(d < t.points[i].size() ? t.points[i][d] : 0.0);
        }
        out << ',' << format_double(t.values[i].norm());
        for (int c = 0; c < k; ++c) out << ',' << format_double(t.values[i][c]);
        out << '\n';
    }
}

void write_curve_csv(const std::string& path, const MonotonicityCurve& c) {
    std::ofstream out = open_out(path);
    out << "r,value,deficit,violation\n";
    for (size_t i = 0; i < c.radii.size(); ++i) {
        const double deficit = i > 0 ? c.deficit[i - 1] : 0.0;
        const double viol = i > 0 ? std::max(0.0, c.theta[i - 1] - c.theta[i]) : 0.0;
        out << format_double(c.radii[i]) << ',' << format_double(c.theta[i]) << ','
            << format_double(deficit) << ',' << format_double(viol) << '\n';
    }
}

void write_struwe_csv(const std::string& path, const StruweQuantity& q) {
    std::ofstream out = open_out(path);
    out << "R,value,slice_t,kernel_mass,rhs,violation\n";
    for (size_t i = 0; i < q.radii.size(); ++i) {
        const double viol = i > 0 ? std::max(0.0, q.values[i - 1] - q.values[i]) : 0.0;
        out << format_double(q.radii[i]) << ',' << format_double(q.values[i]) << ','
            << format_double(q.slice_times[i]) << ',' << format_double(q.kernel_mass[i])
            << ',' << format_double(q.rhs[i]) << ',' << format_double(viol) << '\n';
    }
}

void write_detector_csv(const std::string& path, const SplitGrid& g, const RegularityMap& m) {
    std::ofstream out = open_out(path);
    out << "node,x0,x1,x2,energy,flagged,hoelder\n";
    for (size_t i = 0; i < m.nodes.size(); ++i) {
        out << m.nodes[i];
        write_coords(out, g, m.nodes[i]);
        out << ',' << format_double(m.energy[i]) << ',' << int(m.flagged[i]) << ','
            << format_double(m.hoelder[i]) << '\n';
    }
}

std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
    return buf;
}

}  // namespace hmlab
