#ifndef HMLAB_GRID_HPP
#define HMLAB_GRID_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "hmlab/errors.hpp"
#include "hmlab/vec.hpp"

namespace hmlab {

enum class Side { Plus, Minus };
inline Side other(Side s) { return s == Side::Plus ? Side::Minus : Side::Plus; }

enum class NodeClass : unsigned char {
    InteriorPlus,
    InteriorMinus,
    Gamma,      // x_n = 0, off the outer boundary
    SigmaPlus,  // outer boundary, x_n > 0
    SigmaMinus, // outer boundary, x_n < 0
    SigmaEdge   // outer boundary and x_n = 0 (the set Sigma = boundary of Gamma)
};

// Tensor-product grid on [-extent, extent]^n with the interface on the
// coordinate plane x_n = 0. Omega+ is {x_n > 0}. The node count per axis is
// odd so Gamma coincides exactly with a grid plane; Gamma nodes are
// double-valued (they carry one trace per side).
class SplitGrid {
  public:
    SplitGrid(int dim, double spacing, double extent = 1.0,
              double distortion_constant = 0.0);

    int dim() const { return n_; }
    double h() const { return h_; }
    double extent() const { return extent_; }
    // Measured flattening distortion of Eq-type |DPsi - I| <= C|x - x0|;
    // zero for the flat interfaces used here.
    double distortion_constant() const { return distortion_c_; }

    std::int64_t num_nodes() const { return total_; }
    int nodes_per_axis() const { return npa_; }
    int gamma_plane_index() const { return npa_ / 2; }

    std::array<int, 3> multi_index(std::int64_t id) const;
    std::int64_t node_id(int ix, int iy, int iz) const;
    Vec position(std::int64_t id) const;
    NodeClass node_class(std::int64_t id) const { return cls_[static_cast<size_t>(id)]; }
    bool on_side(std::int64_t id, Side s) const;

    // Trapezoidal volume weight of the node inside the closed side domain
    // (zero when the node is off that side).
    double weight(std::int64_t id, Side s) const;

    // Node id lists per class (ascending, deterministic).
    const std::vector<std::int64_t>& interior(Side s) const {
        return s == Side::Plus ? interior_plus_ : interior_minus_;
    }
    const std::vector<std::int64_t>& gamma_nodes() const { return gamma_; }
    const std::vector<std::int64_t>& sigma_nodes(Side s) const {
        return s == Side::Plus ? sigma_plus_ : sigma_minus_;
    }
    const std::vector<std::int64_t>& sigma_edge_nodes() const { return sigma_edge_; }
    // All nodes belonging to the closed side domain {x_n >= 0} / {x_n <= 0}.
    const std::vector<std::int64_t>& side_nodes(Side s) const {
        return s == Side::Plus ? side_plus_ : side_minus_;
    }

    // Step to the neighbor along axis d (dir = +-1); -1 when outside.
    std::int64_t neighbor(std::int64_t id, int axis, int dir) const;

    int split_axis() const { return n_ - 1; }

  private:
    int n_;
    double h_, extent_, distortion_c_;
    int npa_;
    std::int64_t total_;
    std::array<std::int64_t, 3> stride_;
    std::array<int, 3> count_;
    std::vector<NodeClass> cls_;
    std::vector<std::int64_t> interior_plus_, interior_minus_, gamma_, sigma_plus_,
        sigma_minus_, sigma_edge_, side_plus_, side_minus_;
};

// Manifold-valued field on a SplitGrid: one value per node and side, with
// the Gamma plane double-valued (plus array holds the plus trace there,
// minus array the minus trace). Values are stored node-major over the full
// lattice; only the slots belonging to the side's closed domain are used.
class CoupledField {
  public:
    CoupledField(const SplitGrid& grid, int components);

    const SplitGrid& grid() const { return *grid_; }
    int components() const { return k_; }

    Vec value(Side s, std::int64_t id) const;
    void set_value(Side s, std::int64_t id, const Vec& v);
    Vec trace_plus(std::int64_t gamma_id) const { return value(Side::Plus, gamma_id); }
    Vec trace_minus(std::int64_t gamma_id) const { return value(Side::Minus, gamma_id); }

    std::vector<double>& raw(Side s) { return s == Side::Plus ? plus_ : minus_; }
    const std::vector<double>& raw(Side s) const { return s == Side::Plus ? plus_ : minus_; }

  private:
    const SplitGrid* grid_;
    int k_;
    std::vector<double> plus_, minus_;
};

enum class Carrier { Gamma, SigmaPlus, SigmaMinus, Sphere };

// Values attached to a node subset (or to sample points of a sphere).
struct TraceField {
    Carrier carrier = Carrier::Gamma;
    std::vector<std::int64_t> nodes;  // empty for sphere carriers
    std::vector<Vec> values;
    std::vector<Vec> points;  // sample positions (always filled)
};

}  // namespace hmlab

#endif
