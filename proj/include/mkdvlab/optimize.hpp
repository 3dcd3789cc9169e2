#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace mkdv {

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

/// Standard Nelder-Mead simplex search (reflection 1, expansion 2,
/// contraction 1/2, shrink 1/2). Converged when the simplex diameter in
/// parameter space falls below diameter_tol.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, double initial_scale,
                                    int max_iterations = 2000, double diameter_tol = 1e-8) {
    const std::size_t dim = x0.size();
    std::vector<std::vector<double>> vertex(dim + 1, x0);
    for (std::size_t j = 0; j < dim; ++j) vertex[j + 1][j] += initial_scale;
    std::vector<double> value(dim + 1);
    for (std::size_t v = 0; v <= dim; ++v) value[v] = f(vertex[v]);

    auto sort_simplex = [&] {
        for (std::size_t a = 0; a <= dim; ++a)
            for (std::size_t b = a + 1; b <= dim; ++b)
                if (value[b] < value[a]) {
                    std::swap(value[a], value[b]);
                    std::swap(vertex[a], vertex[b]);
                }
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t a = 0; a <= dim; ++a)
            for (std::size_t b = a + 1; b <= dim; ++b) {
                double s = 0.0;
                for (std::size_t j = 0; j < dim; ++j) {
                    const double diff = vertex[a][j] - vertex[b][j];
                    s += diff * diff;
                }
                d = std::max(d, std::sqrt(s));
            }
        return d;
    };

    NelderMeadResult result;
    int it = 0;
    for (; it < max_iterations; ++it) {
        sort_simplex();
        if (diameter() < diameter_tol) {
            result.converged = true;
            break;
        }
        std::vector<double> centroid(dim, 0.0);
        for (std::size_t v = 0; v < dim; ++v)
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += vertex[v][j] / double(dim);

        auto blend = [&](double alpha) {
            std::vector<double> p(dim);
            for (std::size_t j = 0; j < dim; ++j)
                p[j] = centroid[j] + alpha * (vertex[dim][j] - centroid[j]);
            return p;
        };
        const std::vector<double> reflect = blend(-1.0);
        const double fr = f(reflect);
        if (fr < value[0]) {
            const std::vector<double> expand = blend(-2.0);
            const double fe = f(expand);
            if (fe < fr) {
                vertex[dim] = expand;
                value[dim] = fe;
            } else {
                vertex[dim] = reflect;
                value[dim] = fr;
            }
        } else if (fr < value[dim - 1]) {
            vertex[dim] = reflect;
            value[dim] = fr;
        } else {
            const bool outside = fr < value[dim];
            const std::vector<double> contract = blend(outside ? -0.5 : 0.5);
            const double fc = f(contract);
            if (fc < std::min(fr, value[dim])) {
                vertex[dim] = contract;
                value[dim] = fc;
            } else {
                for (std::size_t v = 1; v <= dim; ++v) {
                    for (std::size_t j = 0; j < dim; ++j)
                        vertex[v][j] = vertex[0][j] + 0.5 * (vertex[v][j] - vertex[0][j]);
                    value[v] = f(vertex[v]);
                }
            }
        }
    }
    sort_simplex();
    result.x = vertex[0];
    result.value = value[0];
    result.iterations = it;
    return result;
}

}  // namespace mkdv
