// Derivative-free simplex minimizer (Nelder-Mead with standard reflection,
// expansion, contraction and shrink coefficients). Returns the best vertex
// ever evaluated, so the result is never worse than the starting point.

#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

namespace qepi {

struct NelderMeadOptions {
    std::size_t max_iters = 200;
    double x_tolerance = 1e-8;    // simplex diameter in parameter space
    double initial_step = 0.25;   // offset of the non-base vertices
};

struct NelderMeadResult {
    std::vector<double> x;
    double fval = 0.0;
    std::size_t iterations = 0;
};

inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
    const std::size_t dim = x0.size();
    struct Vertex {
        std::vector<double> x;
        double f;
    };
    std::vector<Vertex> simplex;
    simplex.reserve(dim + 1);
    simplex.push_back({x0, f(x0)});
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<double> x = x0;
        x[i] += opt.initial_step;
        simplex.push_back({x, f(x)});
    }
    auto by_f = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    std::sort(simplex.begin(), simplex.end(), by_f);

    NelderMeadResult best{simplex[0].x, simplex[0].f, 0};
    auto track = [&](const Vertex& v) {
        if (v.f < best.fval) {
            best.fval = v.f;
            best.x = v.x;
        }
    };

    for (std::size_t iter = 0; iter < opt.max_iters; ++iter) {
        best.iterations = iter + 1;
        double diameter = 0.0;
        for (std::size_t i = 1; i <= dim; ++i)
            for (std::size_t d = 0; d < dim; ++d)
                diameter = std::max(diameter, std::abs(simplex[i].x[d] - simplex[0].x[d]));
        if (diameter < opt.x_tolerance) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t d = 0; d < dim; ++d) centroid[d] += simplex[i].x[d] / static_cast<double>(dim);

        auto blend = [&](double t) {
            std::vector<double> x(dim);
            for (std::size_t d = 0; d < dim; ++d) x[d] = centroid[d] + t * (centroid[d] - simplex[dim].x[d]);
            return x;
        };

        Vertex reflected{blend(1.0), 0.0};
        reflected.f = f(reflected.x);
        track(reflected);

        if (reflected.f < simplex[0].f) {
            Vertex expanded{blend(2.0), 0.0};
            expanded.f = f(expanded.x);
            track(expanded);
            simplex[dim] = expanded.f < reflected.f ? expanded : reflected;
        } else if (reflected.f < simplex[dim - 1].f) {
            simplex[dim] = reflected;
        } else {
            const bool outside = reflected.f < simplex[dim].f;
            Vertex contracted{blend(outside ? 0.5 : -0.5), 0.0};
            contracted.f = f(contracted.x);
            track(contracted);
            if (contracted.f < std::min(reflected.f, simplex[dim].f)) {
                simplex[dim] = contracted;
            } else {
                for (std::size_t i = 1; i <= dim; ++i) {
                    for (std::size_t d = 0; d < dim; ++d)
                        simplex[i].x[d] = simplex[0].x[d] + 0.5 * (simplex[i].x[d] - simplex[0].x[d]);
                    simplex[i].f = f(simplex[i].x);
                    track(simplex[i]);
                }
            }
        }
        std::sort(simplex.begin(), simplex.end(), by_f);
    }
    return best;
}

}  // namespace qepi
