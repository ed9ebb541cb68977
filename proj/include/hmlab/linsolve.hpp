#ifndef HMLAB_LINSOLVE_HPP
#define HMLAB_LINSOLVE_HPP

#include <functional>
#include <vector>

#include "hmlab/errors.hpp"
#include "hmlab/parallel.hpp"

namespace hmlab {

struct CgResult {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

// Plain conjugate gradient for SPD operators given matrix-free. All inner
// products use the ordered block reduction, so the iteration is bitwise
// reproducible regardless of the thread count.
inline CgResult conjugate_gradient(
    const std::function<void(const std::vector<double>&, std::vector<double>&)>& apply,
    const std::vector<double>& b, std::vector<double>& x, int max_iter, double rel_tol) {
    const std::int64_t n = static_cast<std::int64_t>(b.size());
    std::vector<double> r(b.size()), p(b.size()), ap(b.size());
    apply(x, ap);
    par_for(n, [&](std::int64_t i) { r[i] = b[i] - ap[i]; });
    p = r;
    auto dotv = [&](const std::vector<double>& u, const std::vector<double>& v) {
        return ordered_sum(n, [&](std::int64_t i) { return u[i] * v[i]; });
    };
    double rr = dotv(r, r);
    const double b2 = std::max(dotv(b, b), 1e-300);
    const double stop = rel_tol * rel_tol * b2;
    CgResult res;
    if (rr <= stop) {
        res.converged = true;
        res.residual = std::sqrt(rr / b2);
        return res;
    }
    for (int it = 0; it < max_iter; ++it) {
        apply(p, ap);
        const double pap = dotv(p, ap);
        if (pap <= 0) throw LinearSolveFailure("operator not positive definite in CG");
        const double alpha = rr / pap;
        par_for(n, [&](std::int64_t i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        });
        const double rr_new = dotv(r, r);
        res.iterations = it + 1;
        if (rr_new <= stop) {
            res.converged = true;
            res.residual = std::sqrt(rr_new / b2);
            return res;
        }
        const double beta = rr_new / rr;
        rr = rr_new;
        par_for(n, [&](std::int64_t i) { p[i] = r[i] + beta * p[i]; });
    }
    res.residual = std::sqrt(rr / b2);
    return res;
}

}  // namespace hmlab

#endif
