#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "triodflow/vec2.hpp"

namespace triodflow {

struct NelderMeadResult {
    Vec2 x;
    double f;
    int evals;
    bool converged; // simplex diameter reached tol within the eval budget
};

// Plain 2-D Nelder-Mead with the classic coefficients (reflect 1, expand 2,
// contract 0.5, shrink 0.5). Deterministic: ties in the ordering break by
// vertex index, no randomness anywhere.
template <class F>
NelderMeadResult nelder_mead_2d(F&& f, Vec2 x0, double edge, double diam_tol, int max_evals) {
    std::array<Vec2, 3> v{x0, x0 + Vec2{edge, 0.0}, x0 + Vec2{0.0, edge}};
    std::array<double, 3> fv;
    int evals = 0;
    for (int i = 0; i < 3; ++i) {
        fv[i] = f(v[i]);
        ++evals;
    }

    auto order = [&]() {
        // insertion sort on 3 entries, stable
        if (fv[1] < fv[0]) {
            std::swap(fv[0], fv[1]);
            std::swap(v[0], v[1]);
        }
        if (fv[2] < fv[1]) {
            std::swap(fv[1], fv[2]);
            std::swap(v[1], v[2]);
        }
        if (fv[1] < fv[0]) {
            std::swap(fv[0], fv[1]);
            std::swap(v[0], v[1]);
        }
    };
    auto diameter = [&]() {
        return std::max({dist(v[0], v[1]), dist(v[0], v[2]), dist(v[1], v[2])});
    };

    order();
    while (evals < max_evals) {
        if (diameter() <= diam_tol) return {v[0], fv[0], evals, true};

        const Vec2 centroid = (v[0] + v[1]) / 2.0;
        const Vec2 xr = centroid + (centroid - v[2]); // reflection
        const double fr = f(xr);
        ++evals;

        if (fr < fv[0]) {
            const Vec2 xe = centroid + 2.0 * (centroid - v[2]); // expansion
            const double fe = f(xe);
            ++evals;
            if (fe < fr) {
                v[2] = xe;
                fv[2] = fe;
            } else {
                v[2] = xr;
                fv[2] = fr;
            }
        } else if (fr < fv[1]) {
            v[2] = xr;
            fv[2] = fr;
        } else {
            // contraction, outside or inside of the worst vertex
            const Vec2 xc = (fr < fv[2]) ? centroid + 0.5 * (xr - centroid)
                                         : centroid + 0.5 * (v[2] - centroid);
            const double fc = f(xc);
            ++evals;
            if (fc < std::min(fr, fv[2])) {
                v[2] = xc;
                fv[2] = fc;
            } else {
                // shrink toward the best vertex
                for (int i = 1; i < 3; ++i) {
                    v[i] = v[0] + 0.5 * (v[i] - v[0]);
                    fv[i] = f(v[i]);
                    ++evals;
                }
            }
        }
        order();
    }
    return {v[0], fv[0], evals, diameter() <= diam_tol};
}

} // namespace triodflow
