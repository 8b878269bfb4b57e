#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "triodflow/anisotropy.hpp"
#include "triodflow/curve.hpp"
#include "triodflow/diagnostics.hpp"
#include "triodflow/errors.hpp"
#include "triodflow/network.hpp"
#include "triodflow/reparam.hpp"
#include "triodflow/vec2.hpp"

namespace triodflow {

struct FlowConfig {
    int N = 128;
    double cfl = 0.5;
    double t_max = 1.0;
    double L_min = 1e-3;
    double K_max = 1e6;
    double newton_tol = 1e-10;
    int newton_max_iter = 50;
    int reparam_every = 25; // 0 = never
    double delta_reg = 1e-6;
    double a0_floor = 0.05;
};

struct FlowState {
    TriodNetwork net;
    double t = 0.0;
    int step_index = 0;
};

enum class StopKind { MaxTimeReached, LengthVanishing, CurvatureBlowup, SolverFailure };

struct StopReason {
    StopKind kind;
    int curve = -1;     // LengthVanishing only
    std::string detail; // SolverFailure only
};

inline std::string to_string(const StopReason& r) {
    switch (r.kind) {
    case StopKind::MaxTimeReached: return "MaxTimeReached";
    case StopKind::LengthVanishing: return "LengthVanishing(" + std::to_string(r.curve + 1) + ")";
    case StopKind::CurvatureBlowup: return "CurvatureBlowup";
    case StopKind::SolverFailure: return "SolverFailure(" + r.detail + ")";
    }
    return "";
}

// Parabolic mesh constraint for the frozen coefficient psi/|u_x|^2: the
// smallest (speed/N)^2 / M over all nodes, scaled by cfl. Pass M from
// ellipticity_bounds to avoid rescanning psi every step.
inline double cfl_dt(const FlowState& s, const Anisotropy& a, double cfl, double M = -1.0,
                     double delta_reg = 1e-6) {
    if (M <= 0.0) M = a.ellipticity_bounds().second;
    double dt = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const auto f = frenet(s.net.curves[i], delta_reg);
        const int N = s.net.curves[i].N();
        for (double sp : f.speed) dt = std::min(dt, (sp / N) * (sp / N) / M);
    }
    return cfl * dt;
}

namespace detail {

// One curve's semi-implicit update, junction value eliminated: the interior
// solve is affine in the junction position q, u'_k = base_k + z_k q
// (componentwise, shared z). Thomas algorithm; the matrix is strictly
// diagonally dominant.
struct CurveSolve {
    std::vector<double> base_x, base_y, z;
    Vec2 endpoint;
    int N;

    Vec2 node(int k, Vec2 q) const {
        if (k == 0) return q;
        if (k == N) return endpoint;
        return {base_x[k] + z[k] * q.x, base_y[k] + z[k] * q.y};
    }
};

inline CurveSolve solve_curve(const DiscreteCurve& c, const Anisotropy& a, double dt,
                              Vec2 endpoint, double delta_reg) {
    const int N = c.N();
    const auto f = frenet(c, delta_reg);
    std::vector<double> r(N); // r_k = dt * psi(theta_k)/speed_k^2 * N^2
    for (int k = 1; k < N; ++k)
        r[k] = dt * a.psi(f.theta[k]) / (f.speed[k] * f.speed[k]) * N * N;

    // rows k = 1..N-1: -r_k u'_{k-1} + (1+2 r_k) u'_k - r_k u'_{k+1} = u_k,
    // with u'_0 = q and u'_N = endpoint moved to the right-hand side.
    const int n = N - 1;
    std::vector<double> diag(n), lower(n), upper(n);
    std::vector<double> bx(n), by(n), bz(n);
    for (int k = 1; k < N; ++k) {
        const int i = k - 1;
        diag[i] = 1.0 + 2.0 * r[k];
        lower[i] = -r[k];
        upper[i] = -r[k];
        bx[i] = c.nodes[k].x;
        by[i] = c.nodes[k].y;
        bz[i] = 0.0;
    }
    bz[0] = r[1];                       // coefficient of q
    bx[n - 1] += r[N - 1] * endpoint.x; // Dirichlet at x = 1
    by[n - 1] += r[N - 1] * endpoint.y;

    // Thomas forward elimination shared by the three right-hand sides
    for (int i = 1; i < n; ++i) {
        if (diag[i - 1] == 0.0) throw SolverFailure("tridiagonal zero pivot");
        const double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        bx[i] -= w * bx[i - 1];
        by[i] -= w * by[i - 1];
        bz[i] -= w * bz[i - 1];
    }
    if (diag[n - 1] == 0.0) throw SolverFailure("tridiagonal zero pivot");
    CurveSolve cs;
    cs.N = N;
    cs.endpoint = endpoint;
    cs.base_x.assign(N + 1, 0.0);
    cs.base_y.assign(N + 1, 0.0);
    cs.z.assign(N + 1, 0.0);
    cs.base_x[N - 1] = bx[n - 1] / diag[n - 1];
    cs.base_y[N - 1] = by[n - 1] / diag[n - 1];
    cs.z[N - 1] = bz[n - 1] / diag[n - 1];
    for (int i = n - 2; i >= 0; --i) {
        const int k = i + 1;
        cs.base_x[k] = (bx[i] - upper[i] * cs.base_x[k + 1]) / diag[i];
        cs.base_y[k] = (by[i] - upper[i] * cs.base_y[k + 1]) / diag[i];
        cs.z[k] = (bz[i] - upper[i] * cs.z[k + 1]) / diag[i];
    }
    return cs;
}

// Herring residual of the solved trial network as a function of q, using the
// one-sided junction tangents of the implicit solution.
inline Vec2 trial_residual(const std::array<CurveSolve, 3>& cs, const Anisotropy& a, Vec2 q,
                           double delta_reg) {
    Vec2 res{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
        const Vec2 ux = -3.0 * q + 4.0 * cs[i].node(1, q) - cs[i].node(2, q); // times 2h > 0
        const double sp = norm(ux);
        if (sp < delta_reg) throw Degenerate("trial junction speed below regularity floor");
        res += a.polar_grad(perp(ux / sp));
    }
    return res;
}

} // namespace detail

// One semi-implicit step of the special flow with dt given: coefficients
// frozen at time t, interior implicit, junction position closed by a 2-D
// Newton iteration on the Herring residual.
inline FlowState step(const FlowState& s, const Anisotropy& a, const FlowConfig& cfg,
                      double dt) {
    std::array<detail::CurveSolve, 3> cs;
    for (int i = 0; i < 3; ++i)
        cs[i] = detail::solve_curve(s.net.curves[i], a, dt, s.net.endpoints[i], cfg.delta_reg);

    double diam = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            diam = std::max(diam, dist(s.net.endpoints[i], s.net.endpoints[j]));
    const double fd = 1e-7 * diam;

    Vec2 q = s.net.junction();
    try {
        Vec2 R = detail::trial_residual(cs, a, q, cfg.delta_reg);
        for (int it = 0; norm(R) > cfg.newton_tol; ++it) {
            if (it >= cfg.newton_max_iter)
                throw SolverFailure("junction Newton did not converge in " +
                                    std::to_string(cfg.newton_max_iter) + " iterations");
            const Vec2 Rx =
                (detail::trial_residual(cs, a, q + Vec2{fd, 0.0}, cfg.delta_reg) - R) / fd;
            const Vec2 Ry =
                (detail::trial_residual(cs, a, q + Vec2{0.0, fd}, cfg.delta_reg) - R) / fd;
            const double det = Rx.x * Ry.y - Ry.x * Rx.y;
            if (det == 0.0) throw SolverFailure("junction Newton Jacobian singular");
            Vec2 dq{(-R.x * Ry.y + R.y * Ry.x) / det, (-Rx.x * R.y + Rx.y * R.x) / det};

            // damped update: halve while the residual grows; a step that
            // cannot reduce the residual at all means the trial equation has
            // no nearby root for this dt, so fail instead of accepting the
            // climb
            Vec2 q_new = q + dq;
            Vec2 R_new = detail::trial_residual(cs, a, q_new, cfg.delta_reg);
            for (int half = 0; half < 8 && norm(R_new) > norm(R); ++half) {
                dq = 0.5 * dq;
                q_new = q + dq;
                R_new = detail::trial_residual(cs, a, q_new, cfg.delta_reg);
            }
            if (norm(R_new) > norm(R))
                throw SolverFailure("junction Newton line search failed");
            q = q_new;
            R = R_new;
        }
    } catch (const Degenerate& e) {
        // a trial junction position that folds an arm onto itself is a
        // failure of this step's dt, not of the incoming state
        throw SolverFailure(e.what());
    }

    std::array<DiscreteCurve, 3> out;
    for (int i = 0; i < 3; ++i) {
        std::vector<Vec2> nodes(cs[i].N + 1);
        for (int k = 0; k <= cs[i].N; ++k) nodes[k] = cs[i].node(k, q);
        out[i] = DiscreteCurve(std::move(nodes));
    }
    return {TriodNetwork(std::move(out), s.net.endpoints), s.t + dt, s.step_index + 1};
}

using Sink = std::function<void(const FlowState&, const DiagnosticsRecord&)>;

// Time loop: cfl-capped steps, constant-speed resampling every reparam_every
// steps (applied at the head of the following step so every emitted record is
// Newton-projected), stop on the dichotomy thresholds. The sink runs exactly
// once per accepted step, in time order.
inline std::pair<FlowState, StopReason> run(const TriodNetwork& net0, const Anisotropy& a,
                                            const FlowConfig& cfg, const Sink& sink) {
    const double M = a.ellipticity_bounds().second;
    FlowState state{net0, 0.0, 0};
    while (true) {
        if (cfg.reparam_every > 0 && state.step_index > 0 &&
            state.step_index % cfg.reparam_every == 0) {
            std::array<DiscreteCurve, 3> rs;
            for (int i = 0; i < 3; ++i)
                rs[i] = to_constant_speed(state.net.curves[i], state.net.curves[i].N(),
                                          cfg.delta_reg);
            state.net = TriodNetwork(std::move(rs), state.net.endpoints);
        }

        double dt = cfl_dt(state, a, cfg.cfl, M, cfg.delta_reg);
        bool final_step = false;
        if (state.t + dt >= cfg.t_max) {
            dt = cfg.t_max - state.t;
            final_step = true;
        }

        // a failed junction solve usually means dt outran the shortest arm
        // (resampling can grow the cfl bound by orders of magnitude at once),
        // so back the step off before giving up on the whole run
        FlowState next{state.net, 0.0, 0};
        bool stepped = false;
        std::string fail;
        for (int tries = 0; tries < 30 && !stepped; ++tries) {
            try {
                next = step(state, a, cfg, dt);
                stepped = true;
            } catch (const SolverFailure& e) {
                fail = e.what();
                dt *= 0.5;
                final_step = false;
            }
        }
        if (!stepped) return {state, {StopKind::SolverFailure, -1, fail}};
        if (final_step) next.t = cfg.t_max; // land exactly, no fp residue
        state = std::move(next);

        const auto rec = make_record(state.t, state.net, a, cfg.a0_floor, cfg.delta_reg);
        try {
            sink(state, rec);
        } catch (const IoError&) {
            return {state, {StopKind::SolverFailure, -1, "io"}};
        }

        const auto L = rec.L;
        for (int i = 0; i < 3; ++i)
            if (L[i] <= cfg.L_min) return {state, {StopKind::LengthVanishing, i, ""}};
        if (rec.kphi_l2sq >= cfg.K_max) return {state, {StopKind::CurvatureBlowup, -1, ""}};
        if (final_step) return {state, {StopKind::MaxTimeReached, -1, ""}};
    }
}

} // namespace triodflow
