#include "hmlab/grid.hpp"

#include <cmath>

namespace hmlab {

SplitGrid::SplitGrid(int dim, double spacing, double extent, double distortion_constant)
    : n_(dim), h_(spacing), extent_(extent), distortion_c_(distortion_constant) {
    if (dim < 1 || dim > 3) throw ConfigError("grid dimension must be 1, 2, or 3");
    const double cells = extent / spacing;
    const double rounded = std::round(cells);
    if (std::fabs(cells - rounded) > 1e-9 * cells || rounded < 2)
        throw ConfigError("spacing must divide the extent with at least 2 cells per side");
    const int half = static_cast<int>(rounded);
    npa_ = 2 * half + 1;

    total_ = 1;
    for (int d = 0; d < 3; ++d) {
        count_[d] = d < n_ ? npa_ : 1;
        stride_[d] = d == 0 ? 1 : stride_[d - 1] * count_[d - 1];
        total_ *= count_[d];
    }

    cls_.resize(static_cast<size_t>(total_));
    const int mid = npa_ / 2;
    for (std::int64_t id = 0; id < total_; ++id) {
        const auto mi = multi_index(id);
        bool on_box = false;
        for (int d = 0; d < n_; ++d)
            if (mi[d] == 0 || mi[d] == npa_ - 1) on_box = true;
        const int iz = mi[n_ - 1];
        NodeClass c;
        if (iz == mid)
            c = on_box ? NodeClass::SigmaEdge : NodeClass::Gamma;
        else if (on_box)
            c = iz > mid ? NodeClass::SigmaPlus : NodeClass::SigmaMinus;
        else
            c = iz > mid ? NodeClass::InteriorPlus : NodeClass::InteriorMinus;
        cls_[static_cast<size_t>(id)] = c;
        switch (c) {
            case NodeClass::InteriorPlus: interior_plus_.push_back(id); break;
            case NodeClass::InteriorMinus: interior_minus_.push_back(id); break;
            case NodeClass::Gamma: gamma_.push_back(id); break;
            case NodeClass::SigmaPlus: sigma_plus_.push_back(id); break;
            case NodeClass::SigmaMinus: sigma_minus_.push_back(id); break;
            case NodeClass::SigmaEdge: sigma_edge_.push_back(id); break;
        }
        if (iz >= mid) side_plus_.push_back(id);
        if (iz <= mid) side_minus_.push_back(id);
    }
}

std::array<int, 3> SplitGrid::multi_index(std::int64_t id) const {
    std::array<int, 3> mi{0, 0, 0};
    for (int d = 0; d < 3; ++d) {
        mi[d] = static_cast<int>((id / stride_[d]) % count_[d]);
    }
    return mi;
}

std::int64_t SplitGrid::node_id(int ix, int iy, int iz) const {
    return ix * stride_[0] + iy * stride_[1] + iz * stride_[2];
}

Vec SplitGrid::position(std::int64_t id) const {
    const auto mi = multi_index(id);
    Vec x(n_);
    for (int d = 0; d < n_; ++d) x[d] = -extent_ + h_ * mi[d];
    return x;
}

bool SplitGrid::on_side(std::int64_t id, Side s) const {
    const int iz = multi_index(id)[n_ - 1];
    const int mid = npa_ / 2;
    return s == Side::Plus ? iz >= mid : iz <= mid;
}

double SplitGrid::weight(std::int64_t id, Side s) const {
    if (!on_side(id, s)) return 0.0;
    const auto mi = multi_index(id);
    const int mid = npa_ / 2;
    double w = std::pow(h_, n_);
    for (int d = 0; d < n_; ++d) {
        const bool lo = (d == n_ - 1) ? (s == Side::Plus ? mi[d] == mid : mi[d] == 0)
                                      : mi[d] == 0;
        const bool hi = (d == n_ - 1) ? (s == Side::Plus ? mi[d] == npa_ - 1 : mi[d] == mid)
                                      : mi[d] == npa_ - 1;
        if (lo || hi) w *= 0.5;
    }
    return w;
}

std::int64_t SplitGrid::neighbor(std::int64_t id, int axis, int dir) const {
    const auto mi = multi_index(id);
    const int j = mi[axis] + dir;
    if (j < 0 || j >= count_[axis]) return -1;
    return id + dir * stride_[axis];
}

CoupledField::CoupledField(const SplitGrid& grid, int components)
    : grid_(&grid), k_(components),
      plus_(static_cast<size_t>(grid.num_nodes()) * components, 0.0),
      minus_(static_cast<size_t>(grid.num_nodes()) * components, 0.0) {}

Vec CoupledField::value(Side s, std::int64_t id) const {
    const std::vector<double>& a = raw(s);
    Vec v(k_);
    const size_t base = static_cast<size_t>(id) * k_;
    for (int c = 0; c < k_; ++c) v[c] = a[base + c];
    return v;
}

void CoupledField::set_value(Side s, std::int64_t id, const Vec& v) {
    std::vector<double>& a = raw(s);
    const size_t base = static_cast<size_t>(id) * k_;
    for (int c = 0; c < k_; ++c) a[base + c] = v[c];
}

}  // namespace hmlab
