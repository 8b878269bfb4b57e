#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "triodflow/anisotropy.hpp"
#include "triodflow/errors.hpp"
#include "triodflow/vec2.hpp"

namespace triodflow {

// Polyline sampling of u : [0,1] -> R^2 on the uniform grid x_k = k/N.
struct DiscreteCurve {
    std::vector<Vec2> nodes; // N+1 entries

    DiscreteCurve() = default;
    explicit DiscreteCurve(std::vector<Vec2> n) : nodes(std::move(n)) {
        if (nodes.size() < 5) throw Degenerate("DiscreteCurve needs N >= 4");
    }

    int N() const { return static_cast<int>(nodes.size()) - 1; }
};

namespace detail {

// First and second parameter derivatives: central differences at interior
// nodes, one-sided second-order at the ends. The 4-point end stencil for
// u_xx is exact on cubics.
inline std::vector<Vec2> d1(const std::vector<Vec2>& u) {
    const int N = static_cast<int>(u.size()) - 1;
    const double h = 1.0 / N;
    std::vector<Vec2> r(u.size());
    r[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    for (int k = 1; k < N; ++k) r[k] = (u[k + 1] - u[k - 1]) / (2.0 * h);
    r[N] = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * h);
    return r;
}

inline std::vector<Vec2> d2(const std::vector<Vec2>& u) {
    const int N = static_cast<int>(u.size()) - 1;
    const double h2 = 1.0 / (static_cast<double>(N) * N);
    std::vector<Vec2> r(u.size());
    r[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
    for (int k = 1; k < N; ++k) r[k] = (u[k + 1] - 2.0 * u[k] + u[k - 1]) / h2;
    r[N] = (2.0 * u[N] - 5.0 * u[N - 1] + 4.0 * u[N - 2] - u[N - 3]) / h2;
    return r;
}

// Same stencils for scalar node arrays.
inline std::vector<double> d1s(const std::vector<double>& u) {
    const int N = static_cast<int>(u.size()) - 1;
    const double h = 1.0 / N;
    std::vector<double> r(u.size());
    r[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    for (int k = 1; k < N; ++k) r[k] = (u[k + 1] - u[k - 1]) / (2.0 * h);
    r[N] = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * h);
    return r;
}

} // namespace detail

// Per-node Frenet data. Conventions: tau = u_x/|u_x|, nu = tau rotated
// anticlockwise by pi/2, theta = atan2(nu_2, nu_1), kappa = (u_xx.nu)/|u_x|^2,
// kappa_phi = psi(theta) kappa / phi^o(nu) = (phi + phi'')(theta) * kappa.
struct FrenetData {
    std::vector<Vec2> tau;
    std::vector<Vec2> nu;
    std::vector<double> theta;
    std::vector<double> speed;
    std::vector<double> kappa;
    std::vector<double> kappa_phi;
};

// Geometric part only (tau, nu, theta, speed).
inline FrenetData frenet(const DiscreteCurve& c, double delta_reg = 1e-6) {
    const auto ux = detail::d1(c.nodes);
    FrenetData f;
    const std::size_t n = c.nodes.size();
    f.tau.resize(n);
    f.nu.resize(n);
    f.theta.resize(n);
    f.speed.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = norm(ux[k]);
        if (s < delta_reg)
            throw Degenerate("curve speed " + std::to_string(s) + " below regularity floor at node " +
                             std::to_string(k));
        f.speed[k] = s;
        f.tau[k] = ux[k] / s;
        f.nu[k] = perp(f.tau[k]);
        f.theta[k] = std::atan2(f.nu[k].y, f.nu[k].x);
    }
    return f;
}

inline std::vector<double> curvature(const DiscreteCurve& c, double delta_reg = 1e-6) {
    const auto f = frenet(c, delta_reg);
    const auto uxx = detail::d2(c.nodes);
    std::vector<double> kappa(c.nodes.size());
    for (std::size_t k = 0; k < c.nodes.size(); ++k)
        kappa[k] = dot(uxx[k], f.nu[k]) / (f.speed[k] * f.speed[k]);
    return kappa;
}

inline std::vector<double> aniso_curvature(const DiscreteCurve& c, const Anisotropy& a,
                                           double delta_reg = 1e-6) {
    const auto f = frenet(c, delta_reg);
    const auto uxx = detail::d2(c.nodes);
    std::vector<double> kphi(c.nodes.size());
    for (std::size_t k = 0; k < c.nodes.size(); ++k) {
        const double kap = dot(uxx[k], f.nu[k]) / (f.speed[k] * f.speed[k]);
        const auto d = a.phi_theta(f.theta[k]);
        kphi[k] = (d.phi + d.ddphi) * kap;
    }
    return kphi;
}

// All six arrays in one pass.
inline FrenetData full_frenet(const DiscreteCurve& c, const Anisotropy& a,
                              double delta_reg = 1e-6) {
    FrenetData f = frenet(c, delta_reg);
    const auto uxx = detail::d2(c.nodes);
    f.kappa.resize(c.nodes.size());
    f.kappa_phi.resize(c.nodes.size());
    for (std::size_t k = 0; k < c.nodes.size(); ++k) {
        f.kappa[k] = dot(uxx[k], f.nu[k]) / (f.speed[k] * f.speed[k]);
        const auto d = a.phi_theta(f.theta[k]);
        f.kappa_phi[k] = (d.phi + d.ddphi) * f.kappa[k];
    }
    return f;
}

} // namespace triodflow
