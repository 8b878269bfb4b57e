#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "triodflow/anisotropy.hpp"
#include "triodflow/curve.hpp"
#include "triodflow/errors.hpp"
#include "triodflow/network.hpp"
#include "triodflow/vec2.hpp"

namespace triodflow {

namespace detail {

inline std::vector<double> cumulative_arclength(const std::vector<Vec2>& nodes) {
    std::vector<double> s(nodes.size());
    s[0] = 0.0;
    for (std::size_t k = 1; k < nodes.size(); ++k) s[k] = s[k - 1] + dist(nodes[k], nodes[k - 1]);
    return s;
}

// Point at arclength position target along the polyline (clamped to [0, L]).
inline Vec2 polyline_at(const std::vector<Vec2>& nodes, const std::vector<double>& s,
                        double target) {
    if (target <= 0.0) return nodes.front();
    if (target >= s.back()) return nodes.back();
    const auto it = std::upper_bound(s.begin(), s.end(), target);
    const std::size_t j = static_cast<std::size_t>(it - s.begin()); // s[j-1] <= target < s[j]
    const double seg = s[j] - s[j - 1];
    const double w = (target - s[j - 1]) / seg;
    return nodes[j - 1] + w * (nodes[j] - nodes[j - 1]);
}

// Shape polynomial of the reparametrization bump: p(0)=1, p'(0)=0,
// p(1)=p'(1)=p''(1)=0, int_0^1 p = int_0^1 s p = 0. The two vanishing moments
// make the double integral fix both interval endpoints. P and Q are its first
// and second antiderivatives; max|p| = 1 and max|P| < 0.0901 on [0,1].
inline double bump_p(double s) {
    return 1.0 + s * s * (-90.0 + s * (400.0 + s * (-675.0 + s * (504.0 + s * -140.0))));
}
inline double bump_P(double s) {
    return s + s * s * s * (-30.0 + s * (100.0 + s * (-135.0 + s * (84.0 + s * -20.0))));
}
inline double bump_Q(double s) {
    return s * s * (0.5 + s * s * (-7.5 + s * (20.0 + s * (-22.5 + s * (12.0 + s * -2.5)))));
}

// phi(x) = x + mu0 d0^2 Q(x/d0) - mu1 d1^2 Q((1-x)/d1): identity outside the
// two supports, phi(0)=0, phi(1)=1, phi'(0)=phi'(1)=1, phi''(0)=mu0,
// phi''(1)=-mu1 exactly.
struct EndBumpMap {
    double mu0 = 0.0, d0 = 0.25;
    double mu1 = 0.0, d1 = 0.25;

    double operator()(double x) const {
        double v = x;
        if (x < d0) v += mu0 * d0 * d0 * bump_Q(x / d0);
        if (1.0 - x < d1) v -= mu1 * d1 * d1 * bump_Q((1.0 - x) / d1);
        return v;
    }
    double deriv(double x) const {
        double v = 1.0;
        if (x < d0) v += mu0 * d0 * bump_P(x / d0);
        if (1.0 - x < d1) v += mu1 * d1 * bump_P((1.0 - x) / d1);
        return v;
    }
};

// Resample a constant-speed curve at parameters phi(x_k); arclength position
// is proportional to parameter on such curves.
inline DiscreteCurve resample_by_map(const DiscreteCurve& c, const EndBumpMap& phi, int N_out) {
    const auto s = cumulative_arclength(c.nodes);
    const double L = s.back();
    std::vector<Vec2> out(N_out + 1);
    out[0] = c.nodes.front();
    for (int k = 1; k < N_out; ++k) {
        const double x = static_cast<double>(k) / N_out;
        out[k] = polyline_at(c.nodes, s, phi(x) * L);
    }
    out[N_out] = c.nodes.back();
    return DiscreteCurve(std::move(out));
}

} // namespace detail

// Nodes at equal arclength spacing along the piecewise-linear interpolant;
// endpoints preserved exactly.
inline DiscreteCurve to_constant_speed(const DiscreteCurve& c, int N_out,
                                       double delta_reg = 1e-6) {
    if (N_out < 4) throw SpecViolation("to_constant_speed needs N_out >= 4");
    const auto s = detail::cumulative_arclength(c.nodes);
    const double L = s.back();
    const int N_in = c.N();
    for (int k = 1; k <= N_in; ++k)
        if ((s[k] - s[k - 1]) * N_in < delta_reg)
            throw Degenerate("to_constant_speed: chord below regularity floor");
    std::vector<Vec2> out(N_out + 1);
    out[0] = c.nodes.front();
    for (int k = 1; k < N_out; ++k)
        out[k] = detail::polyline_at(c.nodes, s, L * static_cast<double>(k) / N_out);
    out[N_out] = c.nodes.back();
    return DiscreteCurve(std::move(out));
}

// mu is the target of phi''(0)/phi'(0)^2; delta the bump support width in
// parameter units on [0,1]; N the output node count.
struct ReparamSpec {
    double mu;
    double delta;
    int N;
};

// The Appendix construction: f = mu * p(x/delta) supported in [0, delta] with
// f(0) = mu, |f| <= |mu|, zero mean and zero first moment; h is its exact
// double integral and phi = id + h. The returned curve is the input resampled
// at phi(x_k).
inline DiscreteCurve lempara_reparam(const DiscreteCurve& c, const ReparamSpec& spec,
                                     double delta_reg = 1e-6) {
    if (spec.N < 4) throw SpecViolation("lempara_reparam needs N >= 4");
    const double cap = spec.mu != 0.0 ? std::min(0.5, 1.0 / (2.0 * std::abs(spec.mu))) : 0.5;
    if (spec.delta <= 0.0 || spec.delta > cap)
        throw SpecViolation("lempara_reparam: delta exceeds min(L/2, 1/(2|mu|))");

    const auto s = detail::cumulative_arclength(c.nodes);
    const int N_in = c.N();
    double cmin = s.back(), cmax = 0.0;
    for (int k = 1; k <= N_in; ++k) {
        cmin = std::min(cmin, s[k] - s[k - 1]);
        cmax = std::max(cmax, s[k] - s[k - 1]);
    }
    if (cmin * N_in < delta_reg) throw Degenerate("lempara_reparam: degenerate input");
    if (cmax - cmin > 1e-6 * (s.back() / N_in))
        throw SpecViolation("lempara_reparam needs a constant-speed input");

    detail::EndBumpMap phi;
    phi.mu0 = spec.mu;
    phi.d0 = spec.delta;
    return detail::resample_by_map(c, phi, spec.N);
}

struct MakeCompatibleReport {
    AdmissibilityReport before;
    AdmissibilityReport after;
    std::array<double, 3> lambda_target;    // from junction_lambdas
    std::array<double, 3> lambda_achieved;  // discrete psi (u_xx.tau)/|u_x|^2 at x=0
    std::array<double, 3> uxx_far;          // |discrete u_xx(1)| after
};

namespace detail {

// Discrete tangential special-flow speed psi (u_xx.tau)/|u_x|^2 at x = 0.
inline double junction_tangential_speed(const DiscreteCurve& c, const Anisotropy& a,
                                        double delta_reg) {
    const auto j = junction_frenet(c, delta_reg);
    return a.psi(j.theta) * dot(j.uxx_over_speed2, j.tau);
}

// Discrete u_xx . tau at x = 1 (one-sided).
inline double far_tangential_d2(const DiscreteCurve& c, double delta_reg) {
    const auto& u = c.nodes;
    const int N = c.N();
    const double h = 1.0 / N;
    const Vec2 ux = (3.0 * u[N] - 4.0 * u[N - 1] + u[N - 2]) / (2.0 * h);
    const Vec2 uxx = (2.0 * u[N] - 5.0 * u[N - 1] + 4.0 * u[N - 2] - u[N - 3]) / (h * h);
    const double sp = norm(ux);
    if (sp < delta_reg) throw Degenerate("far end speed below regularity floor");
    return dot(uxx, ux / sp);
}

// Secant solve on one bump amplitude so that measure(rebuilt curve) hits
// target. The map is affine in mu up to interpolation effects; a handful of
// iterations reaches rounding level.
template <class Measure>
double secant_on_mu(const DiscreteCurve& base, Measure&& measure, double mu_guess,
                    double target, double scale, const EndBumpMap& fixed, bool far_end,
                    int N_out) {
    auto eval = [&](double mu) {
        EndBumpMap m = fixed;
        if (far_end)
            m.mu1 = mu;
        else
            m.mu0 = mu;
        return measure(resample_by_map(base, m, N_out)) - target;
    };
    double m0 = 0.0, r0 = eval(m0);
    double m1 = mu_guess != 0.0 ? mu_guess : (std::abs(r0) > 0.0 ? -r0 * scale : 1e-3);
    if (m1 == m0) m1 = 1e-3;
    double r1 = eval(m1);
    for (int it = 0; it < 40; ++it) {
        if (std::abs(r1) <= 1e-13 * std::max(1.0, std::abs(target))) return m1;
        const double denom = r1 - r0;
        if (denom == 0.0) break;
        const double m2 = m1 - r1 * (m1 - m0) / denom;
        m0 = m1;
        r0 = r1;
        m1 = m2;
        r1 = eval(m1);
    }
    if (std::abs(r1) > 1e-10 * std::max(1.0, std::abs(target)))
        throw Error("make_compatible: end-condition secant did not converge");
    return m1;
}

} // namespace detail

// Constant-speed resample plus end-supported reparametrization bumps tuned so
// the discrete one-sided stencils meet the compatibility targets exactly:
// tangential special-flow speed = lambda^i from junction_lambdas at x = 0,
// tangential u_xx = 0 at x = 1. The geometric conditions (Herring, kappa_phi
// at x = 1) are preconditions; no parametrization can create them.
inline std::pair<TriodNetwork, MakeCompatibleReport>
make_compatible(const TriodNetwork& net, const Anisotropy& a, double tol = 1e-6,
                double a0_floor = 0.05, double delta_reg = 1e-6) {
    MakeCompatibleReport rep{};
    rep.before = admissibility_report(net, a, tol, a0_floor, delta_reg);
    if (rep.before.herring_res > tol)
        throw GeometricObstruction("make_compatible: Herring residual above tolerance");
    for (int i = 0; i < 3; ++i)
        if (rep.before.kphi_end[i] > tol)
            throw GeometricObstruction("make_compatible: kappa_phi at x=1 above tolerance");

    std::array<DiscreteCurve, 3> cs;
    for (int i = 0; i < 3; ++i)
        cs[i] = to_constant_speed(net.curves[i], net.curves[i].N(), delta_reg);
    TriodNetwork base(cs, net.endpoints);

    const auto jl = junction_lambdas(base, a, a0_floor, delta_reg);
    rep.lambda_target = jl.lambda;

    std::array<DiscreteCurve, 3> out;
    for (int i = 0; i < 3; ++i) {
        const auto& c = base.curves[i];
        const int N = c.N();
        const auto j = detail::junction_frenet(c, delta_reg);
        const double L = detail::cumulative_arclength(c.nodes).back();
        // continuum estimates: lambda = psi(mu0 L)/L^2, far: u_xx.tau = sigma_xx.tau - mu1 L
        const double psi0 = a.psi(j.theta);
        const double mu_est = jl.lambda[i] * L / psi0;

        detail::EndBumpMap phi;
        phi.d0 = std::min(0.25, 1.0 / (4.0 * (std::abs(mu_est) + 0.1)));
        phi.d1 = 0.25;

        phi.mu0 = detail::secant_on_mu(
            c, [&](const DiscreteCurve& t) { return detail::junction_tangential_speed(t, a, delta_reg); },
            mu_est, jl.lambda[i], L / psi0, phi, /*far_end=*/false, N);
        phi.mu1 = detail::secant_on_mu(
            c, [&](const DiscreteCurve& t) { return detail::far_tangential_d2(t, delta_reg); },
            detail::far_tangential_d2(c, delta_reg) / L, 0.0, 1.0 / L, phi, /*far_end=*/true, N);

        out[i] = detail::resample_by_map(c, phi, N);
        for (int k = 0; k < N; ++k) {
            // diffeomorphism guard: sampled parameters must strictly increase
            if (!(phi(static_cast<double>(k + 1) / N) > phi(static_cast<double>(k) / N)))
                throw Error("make_compatible: reparametrization not strictly increasing");
        }
        rep.lambda_achieved[i] = detail::junction_tangential_speed(out[i], a, delta_reg);

        const auto& u = out[i].nodes;
        const double h2 = 1.0 / (static_cast<double>(N) * N);
        rep.uxx_far[i] = norm((2.0 * u[N] - 5.0 * u[N - 1] + 4.0 * u[N - 2] - u[N - 3]) / h2);
    }
    TriodNetwork result(out, net.endpoints);
    rep.after = admissibility_report(result, a, tol, a0_floor, delta_reg);
    return {result, rep};
}

} // namespace triodflow
