#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "triodflow/anisotropy.hpp"
#include "triodflow/curve.hpp"
#include "triodflow/errors.hpp"
#include "triodflow/nelder_mead.hpp"
#include "triodflow/network.hpp"
#include "triodflow/vec2.hpp"

namespace triodflow {

namespace detail {

// Trapezoid rule of a node array against ds = speed * dx.
inline double trapz_ds(const std::vector<double>& f, const std::vector<double>& speed) {
    const int N = static_cast<int>(f.size()) - 1;
    const double h = 1.0 / N;
    double s = 0.5 * (f[0] * speed[0] + f[N] * speed[N]);
    for (int k = 1; k < N; ++k) s += f[k] * speed[k];
    return s * h;
}

} // namespace detail

inline std::array<double, 3> lengths(const TriodNetwork& net, double delta_reg = 1e-6) {
    std::array<double, 3> L;
    for (int i = 0; i < 3; ++i) {
        const auto f = frenet(net.curves[i], delta_reg);
        const std::vector<double> one(f.speed.size(), 1.0);
        L[i] = detail::trapz_ds(one, f.speed);
    }
    return L;
}

// L_phi(u) = int phi^o(nu) ds
inline std::array<double, 3> aniso_lengths(const TriodNetwork& net, const Anisotropy& a,
                                           double delta_reg = 1e-6) {
    std::array<double, 3> L;
    for (int i = 0; i < 3; ++i) {
        const auto f = frenet(net.curves[i], delta_reg);
        std::vector<double> phi(f.speed.size());
        for (std::size_t k = 0; k < phi.size(); ++k) phi[k] = a.phi_theta(f.theta[k]).phi;
        L[i] = detail::trapz_ds(phi, f.speed);
    }
    return L;
}

// (sum_i int (kappa_phi^i)^2 phi^o(nu^i) ds, same + sum_i int ((kappa_phi^i)_s)^2 ds)
inline std::pair<double, double> kphi_norms(const TriodNetwork& net, const Anisotropy& a,
                                            double delta_reg = 1e-6) {
    double l2 = 0.0, grad = 0.0;
    for (int i = 0; i < 3; ++i) {
        const auto f = full_frenet(net.curves[i], a, delta_reg);
        const std::size_t n = f.speed.size();
        std::vector<double> dens(n);
        for (std::size_t k = 0; k < n; ++k)
            dens[k] = f.kappa_phi[k] * f.kappa_phi[k] * a.phi_theta(f.theta[k]).phi;
        l2 += detail::trapz_ds(dens, f.speed);

        const auto dk = detail::d1s(f.kappa_phi); // d kappa_phi / dx
        std::vector<double> gdens(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double ks = dk[k] / f.speed[k]; // arclength derivative
            gdens[k] = ks * ks;
        }
        grad += detail::trapz_ds(gdens, f.speed);
    }
    return {l2, l2 + grad};
}

// sup |partial_s f| / (||partial_s^2 f||_2^{3/4} ||f||_2^{1/4} + ||f||_2 / L^{3/2})
// on one curve; a bounded-ratio surrogate for the interpolation estimates.
inline double interpolation_ratio(const DiscreteCurve& c, const std::vector<double>& f,
                                  double delta_reg = 1e-6) {
    const auto fr = frenet(c, delta_reg);
    const std::size_t n = f.size();
    const std::vector<double> one(n, 1.0);
    const double L = detail::trapz_ds(one, fr.speed);

    const auto dfx = detail::d1s(f);
    std::vector<double> dfs(n);
    for (std::size_t k = 0; k < n; ++k) dfs[k] = dfx[k] / fr.speed[k];
    const auto ddfx = detail::d1s(dfs);
    double sup1 = 0.0;
    std::vector<double> f2(n), ddf2(n);
    for (std::size_t k = 0; k < n; ++k) {
        sup1 = std::max(sup1, std::abs(dfs[k]));
        f2[k] = f[k] * f[k];
        const double dds = ddfx[k] / fr.speed[k];
        ddf2[k] = dds * dds;
    }
    const double nf = std::sqrt(detail::trapz_ds(f2, fr.speed));
    const double nddf = std::sqrt(detail::trapz_ds(ddf2, fr.speed));
    const double denom = std::pow(nddf, 0.75) * std::pow(nf, 0.25) + nf / std::pow(L, 1.5);
    return sup1 / denom;
}

struct DiagnosticsRecord {
    double t;
    std::array<double, 3> L;
    std::array<double, 3> Lphi;
    double kphi_l2sq;
    double kphi_h1sq;
    double herring_res;
    Vec2 junction;
    double a0_min;
    double lambda_mismatch;
};

inline DiagnosticsRecord make_record(double t, const TriodNetwork& net, const Anisotropy& a,
                                     double a0_floor = 0.05, double delta_reg = 1e-6) {
    DiagnosticsRecord r;
    r.t = t;
    r.L = lengths(net, delta_reg);
    r.Lphi = aniso_lengths(net, a, delta_reg);
    const auto kn = kphi_norms(net, a, delta_reg);
    r.kphi_l2sq = kn.first;
    r.kphi_h1sq = kn.second;
    r.herring_res = norm(herring_residual(net, a, delta_reg));
    r.junction = net.junction();
    const auto jl = junction_lambdas(net, a, a0_floor, delta_reg);
    r.a0_min = jl.a0_min;
    r.lambda_mismatch = jl.mismatch;
    return r;
}

struct RateFit {
    double C;
    double T_est;
    double rms;
};

// Least-squares fit of y = C / sqrt(T - t) over the trailing half of the
// series. T is scanned on a fixed 200-point grid past t_last (deterministic);
// C is closed-form per T.
inline RateFit rate_fit(const std::vector<std::pair<double, double>>& series) {
    const std::size_t n = series.size();
    if (n < 8) throw SpecViolation("rate_fit needs at least 8 samples");
    for (std::size_t i = 0; i < n; ++i) {
        if (series[i].second <= 0.0) throw SpecViolation("rate_fit needs y > 0");
        if (i > 0 && series[i].first <= series[i - 1].first)
            throw SpecViolation("rate_fit needs strictly increasing t");
    }
    const std::size_t lo = n / 2;
    for (std::size_t i = lo + 1; i < n; ++i)
        if (series[i].second <= series[i - 1].second)
            throw FitDegenerate("y not strictly increasing over the trailing half");

    const double t_first = series.front().first;
    const double t_last = series.back().first;
    const double span = t_last - t_first;
    RateFit best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    for (int j = 1; j <= 200; ++j) {
        const double T = t_last + (2.0 * span) * j / 200.0;
        double sgy = 0.0, sgg = 0.0;
        for (std::size_t i = lo; i < n; ++i) {
            const double g = 1.0 / std::sqrt(T - series[i].first);
            sgy += g * series[i].second;
            sgg += g * g;
        }
        const double C = sgy / sgg;
        double ss = 0.0;
        for (std::size_t i = lo; i < n; ++i) {
            const double g = 1.0 / std::sqrt(T - series[i].first);
            const double r = series[i].second - C * g;
            ss += r * r;
        }
        const double rms = std::sqrt(ss / static_cast<double>(n - lo));
        if (rms < best.rms) best = {C, T, rms};
    }
    return best;
}

struct SteinerResult {
    Vec2 q;
    double energy;
    bool degenerate; // minimizer pinned at an endpoint
    int evals;
};

// E(q) = sum_i phi^o((P^i - q)^perp): the anisotropic length of the straight
// triod from q. grad E = R * herring_residual, so stationarity is exactly the
// Herring condition.
inline double steiner_energy(const Anisotropy& a, const std::array<Vec2, 3>& P, Vec2 q) {
    double e = 0.0;
    for (int i = 0; i < 3; ++i) e += a.polar_eval(perp(P[i] - q));
    return e;
}

inline SteinerResult steiner_point(const Anisotropy& a, const std::array<Vec2, 3>& P, Vec2 q0) {
    if (P[0] == P[1] || P[1] == P[2] || P[0] == P[2])
        throw SpecViolation("steiner_point needs pairwise distinct endpoints");
    double diam = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) diam = std::max(diam, dist(P[i], P[j]));

    auto E = [&](Vec2 q) { return steiner_energy(a, P, q); };
    constexpr int budget = 100000;
    auto r1 = nelder_mead_2d(E, q0, 0.05 * diam, 1e-12, budget);
    auto r2 = nelder_mead_2d(E, r1.x, std::max(1e-8, 1e-6 * diam), 1e-12, budget - r1.evals);
    if (!r2.converged) throw NoConvergence("steiner_point: evaluation budget exhausted");
    Vec2 q = r2.x;

    // degenerate Steiner configuration: minimizer at an endpoint
    for (int i = 0; i < 3; ++i)
        if (dist(q, P[i]) <= 1e-7 * diam)
            return {P[i], E(P[i]), true, r1.evals + r2.evals};

    // Function values localize the minimum only to ~sqrt(eps); polish with
    // Newton on the Herring residual of the straight triod, which is the
    // energy gradient rotated and is available in closed form.
    auto G = [&](Vec2 p) {
        Vec2 g{0.0, 0.0};
        for (int i = 0; i < 3; ++i) g += a.polar_grad(perp(P[i] - p));
        return g;
    };
    const double fd = 1e-7 * diam;
    for (int it = 0; it < 10; ++it) {
        const Vec2 g = G(q);
        if (norm(g) <= 1e-14) break;
        const Vec2 gx = (G(q + Vec2{fd, 0.0}) - g) / fd;
        const Vec2 gy = (G(q + Vec2{0.0, fd}) - g) / fd;
        const double det = gx.x * gy.y - gy.x * gx.y;
        if (det == 0.0) break;
        const Vec2 dq{(-g.x * gy.y + g.y * gy.x) / det, (-gx.x * g.y + gx.y * g.x) / det};
        if (norm(G(q + dq)) < norm(g))
            q += dq;
        else
            break;
    }
    return {q, E(q), false, r1.evals + r2.evals};
}

} // namespace triodflow
