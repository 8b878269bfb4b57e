#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "triodflow/anisotropy.hpp"
#include "triodflow/curve.hpp"
#include "triodflow/errors.hpp"
#include "triodflow/vec2.hpp"

namespace triodflow {

// Three curves sharing the junction node at parameter 0, pinned to the fixed
// endpoints P^i at parameter 1. Superscripts are mod 3 throughout.
struct TriodNetwork {
    std::array<DiscreteCurve, 3> curves;
    std::array<Vec2, 3> endpoints;

    TriodNetwork(std::array<DiscreteCurve, 3> cs, std::array<Vec2, 3> ps)
        : curves(std::move(cs)), endpoints(ps) {
        for (int i = 0; i < 3; ++i) {
            if (!(curves[i].nodes.front() == curves[0].nodes.front()))
                throw Degenerate("junction node not shared by all three curves");
            if (!(curves[i].nodes.back() == endpoints[i]))
                throw Degenerate("curve endpoint differs from P^" + std::to_string(i + 1));
        }
    }

    Vec2 junction() const { return curves[0].nodes.front(); }
    int N() const { return curves[0].N(); }
};

inline TriodNetwork straight_triod(Vec2 q, const std::array<Vec2, 3>& P, int N) {
    std::array<DiscreteCurve, 3> cs;
    for (int i = 0; i < 3; ++i) {
        std::vector<Vec2> nodes(N + 1);
        for (int k = 0; k <= N; ++k) {
            const double x = static_cast<double>(k) / N;
            nodes[k] = q + x * (P[i] - q);
        }
        nodes[0] = q;      // exact sharing
        nodes[N] = P[i];   // exact pinning
        cs[i] = DiscreteCurve(std::move(nodes));
    }
    return TriodNetwork(std::move(cs), P);
}

namespace detail {

// One-sided junction data for one curve: second-order u_x and u_xx at x = 0.
struct JunctionFrenet {
    Vec2 tau;
    Vec2 nu;
    double theta;
    double speed;
    double kappa;
    Vec2 uxx_over_speed2; // u_xx(0)/|u_x(0)|^2, the discrete special-flow velocity / psi
};

inline JunctionFrenet junction_frenet(const DiscreteCurve& c, double delta_reg = 1e-6) {
    const auto& u = c.nodes;
    const int N = c.N();
    const double h = 1.0 / N;
    const Vec2 ux = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
    const Vec2 uxx = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h);
    JunctionFrenet j;
    j.speed = norm(ux);
    if (j.speed < delta_reg) throw Degenerate("junction speed below regularity floor");
    j.tau = ux / j.speed;
    j.nu = perp(j.tau);
    j.theta = std::atan2(j.nu.y, j.nu.x);
    j.kappa = dot(uxx, j.nu) / (j.speed * j.speed);
    j.uxx_over_speed2 = uxx / (j.speed * j.speed);
    return j;
}

} // namespace detail

// Sum of Cahn-Hoffman vectors at the junction; zero iff the anisotropic
// Herring condition holds there.
inline Vec2 herring_residual(const TriodNetwork& net, const Anisotropy& a,
                             double delta_reg = 1e-6) {
    Vec2 r{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        const auto j = detail::junction_frenet(net.curves[i], delta_reg);
        r += a.polar_grad(j.nu);
    }
    return r;
}

struct JunctionLambdas {
    std::array<double, 3> lambda;       // averages of the two expressions
    std::array<double, 3> lambda_plus;  // via curve i+1
    std::array<double, 3> lambda_minus; // via curve i-1
    double mismatch;                    // max_i |lambda_+ - lambda_-|
    double a0_min;                      // min_i min(|beta|, |delta|)
};

// Tangential junction velocities from the curvature data of the neighbouring
// curves. The two expressions per curve agree only on velocity-matched
// configurations; both are reported, hiding nothing.
inline JunctionLambdas junction_lambdas(const TriodNetwork& net, const Anisotropy& a,
                                        double a0_floor = 0.05, double delta_reg = 1e-6) {
    std::array<detail::JunctionFrenet, 3> jf;
    std::array<double, 3> psik; // psi(theta^i) * kappa^i
    for (int i = 0; i < 3; ++i) {
        jf[i] = detail::junction_frenet(net.curves[i], delta_reg);
        psik[i] = a.psi(jf[i].theta) * jf[i].kappa;
    }
    JunctionLambdas out{};
    out.mismatch = 0.0;
    out.a0_min = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const int ip = (i + 1) % 3;
        const int im = (i + 2) % 3;
        const double alpha = dot(jf[ip].nu, jf[i].nu);
        const double beta = dot(jf[ip].tau, jf[i].nu);
        const double gamma = dot(jf[im].nu, jf[i].nu);
        const double delta = dot(jf[im].tau, jf[i].nu);
        out.a0_min = std::min({out.a0_min, std::abs(beta), std::abs(delta)});
        if (std::abs(beta) < a0_floor || std::abs(delta) < a0_floor)
            throw DegenerateJunction("junction angle factor below a0 floor");
        out.lambda_plus[i] = (alpha / beta) * psik[i] - psik[ip] / beta;
        out.lambda_minus[i] = (gamma / delta) * psik[i] - psik[im] / delta;
        out.lambda[i] = 0.5 * (out.lambda_plus[i] + out.lambda_minus[i]);
        out.mismatch = std::max(out.mismatch, std::abs(out.lambda_plus[i] - out.lambda_minus[i]));
    }
    return out;
}

struct AdmissibilityReport {
    bool concurrency_ok;                  // exact by construction
    double herring_res;                   // |sum_i D phi^o(nu^i)|
    std::array<double, 3> kphi_end;       // |kappa_phi^i(x=1)|
    double velocity_mismatch;             // geometric, lambda from junction_lambdas
    double parametric_velocity_mismatch;  // discrete psi u_xx/|u_x|^2 mismatch
    double lambda_mismatch;
    double a0_min;
    double tol;
    bool pass;
};

// Named residuals of the geometric admissibility conditions plus the
// parametric (cc3) velocity mismatch, each against tol. velocity_mismatch
// uses lambda from junction_lambdas and is parametrization-independent;
// parametric_velocity_mismatch is what a reparametrization can repair and
// does not gate pass/fail.
inline AdmissibilityReport admissibility_report(const TriodNetwork& net, const Anisotropy& a,
                                                double tol, double a0_floor = 0.05,
                                                double delta_reg = 1e-6) {
    AdmissibilityReport rep{};
    rep.tol = tol;
    rep.concurrency_ok = true;
    rep.herring_res = norm(herring_residual(net, a, delta_reg));

    for (int i = 0; i < 3; ++i) {
        const auto kphi = aniso_curvature(net.curves[i], a, delta_reg);
        rep.kphi_end[i] = std::abs(kphi.back());
    }

    const auto jl = junction_lambdas(net, a, a0_floor, delta_reg);
    rep.lambda_mismatch = jl.mismatch;
    rep.a0_min = jl.a0_min;

    std::array<Vec2, 3> vel_geo;
    std::array<Vec2, 3> vel_par;
    for (int i = 0; i < 3; ++i) {
        const auto j = detail::junction_frenet(net.curves[i], delta_reg);
        const double psi = a.psi(j.theta);
        vel_geo[i] = psi * j.kappa * j.nu + jl.lambda[i] * j.tau;
        vel_par[i] = psi * j.uxx_over_speed2;
    }
    rep.velocity_mismatch = 0.0;
    rep.parametric_velocity_mismatch = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            rep.velocity_mismatch = std::max(rep.velocity_mismatch, norm(vel_geo[i] - vel_geo[j]));
            rep.parametric_velocity_mismatch =
                std::max(rep.parametric_velocity_mismatch, norm(vel_par[i] - vel_par[j]));
        }

    rep.pass = rep.herring_res <= tol && rep.velocity_mismatch <= tol &&
               std::all_of(rep.kphi_end.begin(), rep.kphi_end.end(),
                           [tol](double v) { return v <= tol; });
    return rep;
}

} // namespace triodflow
