// Extremal values lambda_M on either side of the critical weight for the orbit of 2i,
// printed as CSV (M, lambda at each s). Usage: sample_threshold [max_entry] [max_points]

#include <cstdio>
#include <cstdlib>

#include <orbit_bergman.hpp>

using namespace orbit_bergman;

int main(int argc, char** argv) {
    ExtremalBudget b;
    b.max_entry = argc > 1 ? std::atoll(argv[1]) : 24;
    b.max_points = argc > 2 ? static_cast<std::size_t>(std::atoll(argv[2])) : 800;
    const std::vector<double> s_grid{8.0, 12.0, 13.0, 14.0, 18.0};
    const auto r = extremal_profile(psl2z(), Point::half_plane(Complex(0.0, 2.0)), Point::disc(0.0), s_grid, b);

    std::printf("# critical weight %s, certified hyperbolic radius %s\n", format_double(r.critical).c_str(),
                format_double(r.certified_radius).c_str());
    std::printf("M");
    for (double s : s_grid) std::printf(",lambda_s%g", s);
    std::printf("\n");
    const std::size_t m = r.profiles.front().lambda.size();
    // doubling steps keep the output short
    for (std::size_t k = 1; k < m; k *= 2) {
        std::printf("%zu", k);
        for (const auto& p : r.profiles) std::printf(",%s", format_double(p.lambda[k]).c_str());
        std::printf("\n");
    }
    std::printf("%zu", m - 1);
    for (const auto& p : r.profiles) std::printf(",%s", format_double(p.lambda[m - 1]).c_str());
    std::printf("\n");
}
