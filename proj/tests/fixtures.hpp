#pragma once

// Shared geometric fixtures for the unit and acceptance tests.

#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "triodflow/anisotropy.hpp"
#include "triodflow/network.hpp"

namespace fixtures {

using namespace triodflow;

inline Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Plateau step: S(0) = 0, S'(0) = 3/x1 > 0, S identically 1 on [x1, 1] with a
// C^2 join, so curves built on it are exactly straight near the far end.
constexpr double step_x1 = 0.7;

inline double step_S(double x) {
    if (x >= step_x1) return 1.0;
    const double t = 1.0 - x / step_x1;
    return 1.0 - t * t * t;
}

inline double step_dS(double x) {
    if (x >= step_x1) return 0.0;
    const double t = 1.0 - x / step_x1;
    return 3.0 * t * t / step_x1;
}

// 120-degree straight arms of length L, arm i carrying the parameter skew
// g_i(x) = x + c_i x (1 - x) (needs |c_i| < 1): identical geometry, different
// parameter speeds near the junction.
inline TriodNetwork skewed_y(Vec2 q, const std::array<double, 3>& c, double L, int N) {
    std::array<DiscreteCurve, 3> cs;
    std::array<Vec2, 3> P;
    for (int i = 0; i < 3; ++i) {
        const Vec2 dir = unit(2.0 * std::numbers::pi * i / 3.0);
        std::vector<Vec2> nodes(N + 1);
        for (int k = 0; k <= N; ++k) {
            const double x = static_cast<double>(k) / N;
            nodes[k] = q + (L * (x + c[i] * x * (1.0 - x))) * dir;
        }
        nodes[0] = q;
        nodes[N] = q + L * dir;
        cs[i] = DiscreteCurve(std::move(nodes));
        P[i] = cs[i].nodes.back();
    }
    return TriodNetwork(std::move(cs), P);
}

// Unit-speed arms of length L with tangent angles b_i + da_i S(x),
// b_i = 2 pi i / 3. The bends da_i are chosen so the three junction
// velocities psi^i kappa^i nu^i + lambda^i tau^i coincide with V; the angles
// are balanced only for 3-fold symmetric anisotropies (isotropic, or fourier
// with k = 3 and theta0 a multiple of pi/3), so pass one of those.
inline TriodNetwork bent_triod(const Anisotropy& a, Vec2 q, Vec2 V, double L, int N) {
    std::array<DiscreteCurve, 3> cs;
    std::array<Vec2, 3> P;
    for (int i = 0; i < 3; ++i) {
        const double base = 2.0 * std::numbers::pi * i / 3.0;
        const Vec2 nu = perp(unit(base));
        const double psi = a.psi(std::atan2(nu.y, nu.x));
        const double kappa = dot(V, nu) / psi;
        const double da = kappa * L / step_dS(0.0);

        // u(x) = q + L int_0^x tau(a(xi)) dxi, composite Simpson per interval
        std::vector<Vec2> nodes(N + 1);
        nodes[0] = q;
        Vec2 acc = q;
        const int sub = 16;
        for (int k = 0; k < N; ++k) {
            const double x0 = static_cast<double>(k) / N;
            const double hh = 1.0 / (static_cast<double>(N) * sub);
            for (int j = 0; j < sub; ++j) {
                const double xa = x0 + j * hh, xb = xa + hh, xm = xa + 0.5 * hh;
                auto tau = [&](double x) { return unit(base + da * step_S(x)); };
                acc += (L * hh / 6.0) * (tau(xa) + 4.0 * tau(xm) + tau(xb));
            }
            nodes[k + 1] = acc;
        }
        cs[i] = DiscreteCurve(std::move(nodes));
        P[i] = cs[i].nodes.back();
    }
    return TriodNetwork(std::move(cs), P);
}

// Quadratic Bezier arm from q with initial tangent along dir, ending at P.
// The one-sided junction stencil is exact on quadratics, so the discrete
// junction tangent equals dir to machine precision.
inline DiscreteCurve bowed_arm(Vec2 q, Vec2 dir, Vec2 P, double c, int N) {
    const Vec2 C = q + c * dir;
    std::vector<Vec2> nodes(N + 1);
    for (int k = 0; k <= N; ++k) {
        const double x = static_cast<double>(k) / N;
        nodes[k] = (1.0 - x) * (1.0 - x) * q + 2.0 * x * (1.0 - x) * C + x * x * P;
    }
    nodes[0] = q;
    nodes[N] = P;
    return DiscreteCurve(std::move(nodes));
}

// bent_triod carrying the skewed_y parameter maps: node k of arm i sits at
// curve parameter g_i(k/N), g_i(x) = x + c_i x (1 - x). Same three curves as
// bent_triod(a, q, V, L, N), uneven parameter speeds.
inline TriodNetwork bent_triod_skewed(const Anisotropy& a, Vec2 q, Vec2 V, double L, int N,
                                      const std::array<double, 3>& c) {
    std::array<DiscreteCurve, 3> cs;
    std::array<Vec2, 3> P;
    for (int i = 0; i < 3; ++i) {
        const double base = 2.0 * std::numbers::pi * i / 3.0;
        const Vec2 nu = perp(unit(base));
        const double psi = a.psi(std::atan2(nu.y, nu.x));
        const double kappa = dot(V, nu) / psi;
        const double da = kappa * L / step_dS(0.0);

        std::vector<Vec2> nodes(N + 1);
        nodes[0] = q;
        Vec2 acc = q;
        const int sub = 16;
        for (int k = 0; k < N; ++k) {
            const double x0 = static_cast<double>(k) / N;
            const double x1 = static_cast<double>(k + 1) / N;
            const double g0 = x0 + c[i] * x0 * (1.0 - x0);
            const double g1 = x1 + c[i] * x1 * (1.0 - x1);
            const double hh = (g1 - g0) / sub;
            for (int j = 0; j < sub; ++j) {
                const double xa = g0 + j * hh, xb = xa + hh, xm = xa + 0.5 * hh;
                auto tau = [&](double x) { return unit(base + da * step_S(x)); };
                acc += (L * hh / 6.0) * (tau(xa) + 4.0 * tau(xm) + tau(xb));
            }
            nodes[k + 1] = acc;
        }
        cs[i] = DiscreteCurve(std::move(nodes));
        P[i] = cs[i].nodes.back();
    }
    return TriodNetwork(std::move(cs), P);
}

} // namespace fixtures
