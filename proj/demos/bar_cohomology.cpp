// Bar cohomology of a few small algebras: the two-cell nonformal model in
// degree 9, the loop space of S^3, and a minimal detecting length on CP^2.

#include <chen/bar.hpp>

#include <iostream>

int main()
{
    using namespace chen;

    const auto A = two_cell_nonformal_model();
    std::cout << serialize_algebra(A) << "\n";

    const auto R = cohomology(A, 9, 6);
    std::cout << report_text(A, R);
    const auto det = min_length_detector(A, 9, 6);
    std::cout << "detected at length " << det.length << " by " << det.representative.str(A)
              << ", distortion O(L^" << distortion_exponent(10, det.length) << ")\n\n";

    const auto S3 = sphere_model(3);
    std::cout << "S^3 loop-space ranks:";
    for (int d = 0; d <= 8; ++d)
        std::cout << " " << cohomology(S3, d, 8).rank;
    std::cout << "\n";

    const auto CP2 = cpn_model(2);
    const auto c = min_length_detector(CP2, 4, 8);
    std::cout << "CP^2, degree 4: length " << c.length << ", " << c.representative.str(CP2) << ", O(L^"
              << distortion_exponent(5, c.length) << ")\n";
}
