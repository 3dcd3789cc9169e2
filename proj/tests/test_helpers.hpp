#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mkdvlab/grid.hpp"
#include "mkdvlab/spectral.hpp"

namespace mkdv::testing {

/// Random band-limited periodic field with unit L2 norm.
inline Field random_band_limited(const Grid& grid, unsigned seed, int modes = 24) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(modes)), b(static_cast<std::size_t>(modes));
    for (int m = 0; m < modes; ++m) {
        a[static_cast<std::size_t>(m)] = gauss(rng);
        b[static_cast<std::size_t>(m)] = gauss(rng);
    }
    Field f = Field::from_function(grid, [&](double x) {
        double s = 0.0;
        for (int m = 1; m <= modes; ++m)
            s += a[static_cast<std::size_t>(m - 1)] * std::cos(2.0 * M_PI * m * x / grid.length) +
                 b[static_cast<std::size_t>(m - 1)] * std::sin(2.0 * M_PI * m * x / grid.length);
        return s;
    });
    f *= 1.0 / l2_norm(f);
    return f;
}

/// Random band-limited field under a Gaussian envelope (decays at the box
/// edges), unit L2 norm. sigma defaults to length/11 so the edge value is
/// below 1e-13.
inline Field random_decaying(const Grid& grid, unsigned seed, int modes = 16, double sigma = 0.0) {
    if (sigma <= 0.0) sigma = grid.length / 11.0;
    Field f = random_band_limited(grid, seed, modes);
    Field env = Field::from_function(
        grid, [sigma](double x) { return std::exp(-x * x / (2.0 * sigma * sigma)); });
    Field g = hadamard(f, env);
    g *= 1.0 / l2_norm(g);
    return g;
}

}  // namespace mkdv::testing
