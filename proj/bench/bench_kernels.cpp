// Timing comparison of the OpenMP kernels against the serial reference
// implementations, plus an equality check of their outputs.

#include <chrono>
#include <cmath>
#include <cstdio>

#include "hmlab/calculus.hpp"
#include "hmlab/parallel.hpp"
#include "hmlab/serial_ref.hpp"

using namespace hmlab;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_ms(int reps, F&& f) {
    const double t0 = now_ms();
    for (int i = 0; i < reps; ++i) f();
    return (now_ms() - t0) / reps;
}

}  // namespace

int main(int argc, char** argv) {
    int threads = argc > 1 ? std::atoi(argv[1]) : 4;
    const int npa_cells = argc > 2 ? std::atoi(argv[2]) : 64;

    SplitGrid grid(3, 1.0 / npa_cells, 1.0);
    CoupledField f(grid, 3);
    for (Side s : {Side::Plus, Side::Minus})
        for (std::int64_t id : grid.side_nodes(s)) {
            const Vec x = grid.position(id);
            f.set_value(s, id,
                        Vec{std::sin(x[0] + 2 * x[1]), std::cos(x[1] - x[2]),
                            std::sin(x[2]) * std::cos(x[0])});
        }

    std::printf("grid %d^3, %lld nodes\n", grid.nodes_per_axis(),
                static_cast<long long>(grid.num_nodes()));

    set_num_threads(1);
    const double e_ref = serial_ref::edge_energy_side(f, Side::Plus) +
                         serial_ref::edge_energy_side(f, Side::Minus);
    const auto g_ref = serial_ref::edge_energy_gradient(f, Side::Plus);
    const double t_serial_e = time_ms(5, [&] {
        volatile double e = serial_ref::edge_energy_side(f, Side::Plus);
        (void)e;
    });
    const double t_serial_g = time_ms(5, [&] {
        auto g = serial_ref::edge_energy_gradient(f, Side::Plus);
        (void)g;
    });

    set_num_threads(threads);
    const double e_par = edge_energy(f);
    const auto g_par = edge_energy_gradient(f, Side::Plus);
    const double t_par_e =
        time_ms(5, [&] { volatile double e = edge_energy_side(f, Side::Plus); (void)e; });
    const double t_par_g = time_ms(5, [&] {
        auto g = edge_energy_gradient(f, Side::Plus);
        (void)g;
    });

    double gdiff = 0;
    for (size_t i = 0; i < g_ref.size(); ++i)
        gdiff = std::max(gdiff, std::fabs(g_ref[i] - g_par[i]));

    std::printf("edge energy    serial %8.3f ms   parallel(%d) %8.3f ms   |diff| %.3e\n",
                t_serial_e, threads, t_par_e, std::fabs(e_ref - e_par));
    std::printf("edge gradient  serial %8.3f ms   parallel(%d) %8.3f ms   |diff| %.3e\n",
                t_serial_g, threads, t_par_g, gdiff);

    const double t_grad = time_ms(5, [&] {
        auto g = discrete_gradient(f, Side::Plus);
        (void)g;
    });
    std::printf("node gradient  parallel(%d) %8.3f ms\n", threads, t_grad);
    return 0;
}
