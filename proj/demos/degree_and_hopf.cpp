// Degree and Hopf invariant computed as pairings of iterated integrals with
// families of loops, plus a short sharpness scan.

#include <chen/itint.hpp>

#include <cstdio>

int main()
{
    using namespace chen;

    for (int k : {1, 2, 3}) {
        const auto p = degree_via_loops(maps::suspension_power(2, k));
        std::printf("deg(suspension of z^%d) = %.6f  (± %.1e)\n", k, p.value, p.error_estimate);
    }
    std::printf("deg(reflection)        = %.6f\n", degree_via_loops(maps::reflection(2)).value);

    QuadratureOptions coarse;
    coarse.cells = 8;
    coarse.time_cells = 8;
    const auto h = hopf_via_loops(maps::hopf(), coarse);
    std::printf("Hopf(hopf map)         = %.6f  (± %.1e)\n", h.value, h.error_estimate);

    std::printf("\n%-18s %3s %14s %12s %14s\n", "experiment", "L", "value", "suplength", "volume");
    for (const auto& r : sharpness_scan({1, 2, 4}, ScanMode::degree, coarse, {8, 32}))
        std::printf("%-18s %3d %14.6f %12.6f %14.6f\n", r.experiment.c_str(), r.L, r.value, r.suplength,
                    r.volume_estimate);
}
