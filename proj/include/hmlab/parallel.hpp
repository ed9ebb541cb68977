#ifndef HMLAB_PARALLEL_HPP
#define HMLAB_PARALLEL_HPP

#include <cstdint>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace hmlab {

// Runtime thread setting shared by all kernels. 1 = serial. Grids below a
// few thousand nodes are not worth forking for, hence the grain size.
void set_num_threads(int n);
int num_threads();

constexpr std::int64_t kParGrain = 4096;

// Parallel node sweep. The body must write only to slot i so the result is
// schedule-independent.
template <typename F>
void par_for(std::int64_t n, F&& body) {
#if defined(_OPENMP)
    if (num_threads() > 1 && n >= kParGrain) {
#pragma omp parallel for schedule(static) num_threads(num_threads())
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

// Deterministic sum reduction: fixed-size blocks are summed independently
// (possibly in parallel) and the block partials are combined in block order.
// The result is bitwise independent of the thread count.
template <typename F>
double ordered_sum(std::int64_t n, F&& term) {
    constexpr std::int64_t kBlock = 2048;
    const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
    if (nblocks <= 1) {
        double s = 0.0;
        for (std::int64_t i = 0; i < n; ++i) s += term(i);
        return s;
    }
    std::vector<double> partial(static_cast<size_t>(nblocks), 0.0);
    par_for(nblocks, [&](std::int64_t b) {
        const std::int64_t lo = b * kBlock;
        const std::int64_t hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) s += term(i);
        partial[static_cast<size_t>(b)] = s;
    });
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

// Deterministic max reduction, same blocking scheme.
template <typename F>
double ordered_max(std::int64_t n, F&& term) {
    constexpr std::int64_t kBlock = 2048;
    const std::int64_t nblocks = (n + kBlock - 1) / kBlock;
    if (nblocks <= 1) {
        double m = 0.0;
        for (std::int64_t i = 0; i < n; ++i) m = std::max(m, term(i));
        return m;
    }
    std::vector<double> partial(static_cast<size_t>(nblocks), 0.0);
    par_for(nblocks, [&](std::int64_t b) {
        const std::int64_t lo = b * kBlock;
        const std::int64_t hi = std::min(n, lo + kBlock);
        double m = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) m = std::max(m, term(i));
        partial[static_cast<size_t>(b)] = m;
    });
    double m = 0.0;
    for (double p : partial) m = std::max(m, p);
    return m;
}

}  // namespace hmlab

#endif
