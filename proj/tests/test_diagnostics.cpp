#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fixtures.hpp"
#include "triodflow/diagnostics.hpp"

using namespace triodflow;
using Catch::Approx;

namespace {

constexpr double pi = std::numbers::pi;

TriodNetwork straight_net(Vec2 q, const std::array<Vec2, 3>& P, int N) {
    return straight_triod(q, P, N);
}

// Triod whose first arm is a circular arc (radius R, opening angle A) and
// whose other two arms are straight; all meet at q.
TriodNetwork arc_triod(double R, double A, int N) {
    const Vec2 q{0.0, 0.0};
    std::array<DiscreteCurve, 3> cs;
    std::array<Vec2, 3> P;
    const double a0 = pi; // arc starts at angle pi around its center
    const Vec2 C = q - R * Vec2{std::cos(a0), std::sin(a0)};
    std::vector<Vec2> arc(N + 1);
    for (int k = 0; k <= N; ++k) {
        const double al = a0 + A * k / N;
        arc[k] = C + R * Vec2{std::cos(al), std::sin(al)};
    }
    arc[0] = q;
    cs[0] = DiscreteCurve(std::move(arc));
    P[0] = cs[0].nodes.back();
    for (int i = 1; i < 3; ++i) {
        const Vec2 dir = fixtures::unit(-pi / 3.0 * i);
        std::vector<Vec2> nodes(N + 1);
        for (int k = 0; k <= N; ++k) nodes[k] = q + (static_cast<double>(k) / N) * dir;
        nodes[0] = q;
        cs[i] = DiscreteCurve(std::move(nodes));
        P[i] = cs[i].nodes.back();
    }
    return TriodNetwork(std::move(cs), P);
}

} // namespace

TEST_CASE("lengths of straight arms are exact", "[diagnostics]") {
    const Vec2 q{0.25, -0.1};
    const std::array<Vec2, 3> P{Vec2{1.25, -0.1}, Vec2{0.25, 1.9}, Vec2{-0.25, -0.1}};
    const auto L = lengths(straight_net(q, P, 32));
    REQUIRE(L[0] == Approx(1.0).epsilon(1e-13));
    REQUIRE(L[1] == Approx(2.0).epsilon(1e-13));
    REQUIRE(L[2] == Approx(0.5).epsilon(1e-13));
}

TEST_CASE("anisotropic length of a straight arm is phi times length", "[diagnostics]") {
    const auto a = Anisotropy::fourier(0.1, 2, 0.4);
    const Vec2 q{0.0, 0.0};
    const std::array<Vec2, 3> P{Vec2{1.5, 0.2}, Vec2{-0.9, 1.0}, Vec2{-0.3, -1.2}};
    const auto net = straight_net(q, P, 64);
    const auto Lphi = aniso_lengths(net, a);
    for (int i = 0; i < 3; ++i) {
        const Vec2 nu = perp(P[i] - q) / norm(P[i] - q);
        const double phi = a.phi_theta(std::atan2(nu.y, nu.x)).phi;
        REQUIRE(Lphi[i] == Approx(phi * norm(P[i] - q)).epsilon(1e-13));
    }
    // total anisotropic length of a straight triod = Steiner energy at q
    REQUIRE(Lphi[0] + Lphi[1] + Lphi[2] ==
            Approx(steiner_energy(a, P, q)).epsilon(1e-13));
}

TEST_CASE("isotropic lengths agree with anisotropic ones", "[diagnostics]") {
    const auto net = fixtures::bent_triod(Anisotropy::isotropic(), {0.1, 0.0}, {0.2, 0.1}, 1.0, 64);
    const auto L = lengths(net);
    const auto Lphi = aniso_lengths(net, Anisotropy::isotropic());
    for (int i = 0; i < 3; ++i) REQUIRE(L[i] == Approx(Lphi[i]).epsilon(1e-14));
    REQUIRE(L[0] == Approx(1.0).epsilon(1e-6)); // unit-speed construction
}

TEST_CASE("curvature norms of a circular arc", "[diagnostics]") {
    // Arc of radius R and opening A: kappa = 1/R, so the squared L2 norm is
    // A/R and the arclength gradient contributes nothing.
    const double R = 2.0, A = pi / 2.0;
    const auto net = arc_triod(R, A, 256);
    const auto [l2, h1] = kphi_norms(net, Anisotropy::isotropic());
    REQUIRE(l2 == Approx(A / R).epsilon(2e-3));
    REQUIRE(h1 - l2 < 1e-6);
    REQUIRE(h1 >= l2);
}

TEST_CASE("interpolation ratio is bounded and dilation invariant", "[diagnostics]") {
    const int N = 128;
    std::vector<Vec2> nodes(N + 1);
    std::vector<double> f(N + 1);
    for (int k = 0; k <= N; ++k) {
        const double x = static_cast<double>(k) / N;
        nodes[k] = {2.0 * x, 0.0};
        f[k] = std::sin(2.0 * pi * x);
    }
    const DiscreteCurve c(nodes);
    const double r = interpolation_ratio(c, f);
    REQUIRE(r > 0.05);
    REQUIRE(r < 3.0);

    // scaling f leaves the ratio unchanged (both sides are 1-homogeneous)
    std::vector<double> f5(f);
    for (auto& v : f5) v *= 5.0;
    REQUIRE(interpolation_ratio(c, f5) == Approx(r).epsilon(1e-12));

    // dilating the curve leaves the ratio unchanged as well
    std::vector<Vec2> dil(nodes);
    for (auto& p : dil) p = 3.0 * p;
    REQUIRE(interpolation_ratio(DiscreteCurve(dil), f) == Approx(r).epsilon(1e-10));
}

TEST_CASE("record fields match the field functions", "[diagnostics]") {
    const auto a = Anisotropy::fourier(0.06, 3, 0.0);
    const auto net = fixtures::bent_triod(a, {0.0, 0.0}, {0.2, 0.1}, 1.0, 48);
    const auto rec = make_record(0.75, net, a);
    REQUIRE(rec.t == 0.75);
    REQUIRE(rec.L == lengths(net));
    REQUIRE(rec.Lphi == aniso_lengths(net, a));
    const auto [l2, h1] = kphi_norms(net, a);
    REQUIRE(rec.kphi_l2sq == l2);
    REQUIRE(rec.kphi_h1sq == h1);
    REQUIRE(rec.herring_res == norm(herring_residual(net, a)));
    REQUIRE(rec.junction == net.junction());
    const auto jl = junction_lambdas(net, a);
    REQUIRE(rec.a0_min == jl.a0_min);
    REQUIRE(rec.lambda_mismatch == jl.mismatch);
}

TEST_CASE("rate fit recovers an on-grid blowup exactly", "[diagnostics]") {
    // T = t_last + 2 span * (100/200) lands exactly on the scan grid.
    std::vector<std::pair<double, double>> series;
    const double T = 1.8, C = 2.0;
    for (int i = 0; i <= 50; ++i) {
        const double t = 0.9 * i / 50.0;
        series.emplace_back(t, C / std::sqrt(T - t));
    }
    const auto fit = rate_fit(series);
    REQUIRE(fit.T_est == Approx(T).margin(1e-12));
    REQUIRE(fit.C == Approx(C).epsilon(1e-12));
    REQUIRE(fit.rms < 1e-12);
}

TEST_CASE("rate fit localizes an off-grid blowup to the scan spacing", "[diagnostics]") {
    std::vector<std::pair<double, double>> series;
    const double T = 1.0, C = 3.0;
    for (int i = 0; i <= 50; ++i) {
        const double t = 0.9 * i / 50.0;
        series.emplace_back(t, C / std::sqrt(T - t));
    }
    const auto fit = rate_fit(series);
    REQUIRE(std::abs(fit.T_est - T) <= 0.009 + 1e-12); // grid spacing 2*0.9/200
    REQUIRE(fit.C == Approx(C).epsilon(0.1));
    REQUIRE(fit.rms < 0.2);
}

TEST_CASE("rate fit input guards", "[diagnostics]") {
    std::vector<std::pair<double, double>> s;
    for (int i = 0; i < 7; ++i) s.emplace_back(i * 0.1, 1.0 + i);
    REQUIRE_THROWS_AS(rate_fit(s), SpecViolation); // too short

    std::vector<std::pair<double, double>> neg;
    for (int i = 0; i < 12; ++i) neg.emplace_back(i * 0.1, i == 5 ? -1.0 : 1.0 + i);
    REQUIRE_THROWS_AS(rate_fit(neg), SpecViolation); // nonpositive values

    std::vector<std::pair<double, double>> tbad;
    for (int i = 0; i < 12; ++i) tbad.emplace_back(i == 6 ? 0.5 : i * 0.1, 1.0 + i);
    REQUIRE_THROWS_AS(rate_fit(tbad), SpecViolation); // time not increasing

    std::vector<std::pair<double, double>> flat;
    for (int i = 0; i < 12; ++i) flat.emplace_back(i * 0.1, i < 6 ? 1.0 + i : 10.0);
    REQUIRE_THROWS_AS(rate_fit(flat), FitDegenerate); // trailing half not increasing
}

TEST_CASE("steiner point of the symmetric triangle is the center", "[diagnostics]") {
    const std::array<Vec2, 3> P{fixtures::unit(pi / 2.0), fixtures::unit(pi / 2.0 + 2.0 * pi / 3.0),
                                fixtures::unit(pi / 2.0 - 2.0 * pi / 3.0)};
    const auto r = steiner_point(Anisotropy::isotropic(), P, {0.3, 0.2});
    REQUIRE_FALSE(r.degenerate);
    REQUIRE(norm(r.q) < 1e-9);
    REQUIRE(r.energy == Approx(3.0).epsilon(1e-10));
}

TEST_CASE("steiner point matches the Fermat point of a right triangle", "[diagnostics]") {
    const std::array<Vec2, 3> P{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};
    const double s = (3.0 - std::sqrt(3.0)) / 6.0; // stationary point on the diagonal
    const auto r = steiner_point(Anisotropy::isotropic(), P, {0.4, 0.4});
    REQUIRE_FALSE(r.degenerate);
    REQUIRE(r.q.x == Approx(s).margin(1e-10));
    REQUIRE(r.q.y == Approx(s).margin(1e-10));
}

TEST_CASE("steiner point beats a brute-force grid", "[diagnostics]") {
    const auto a = Anisotropy::fourier(0.08, 3, 0.1);
    const std::array<Vec2, 3> P{Vec2{1.1, 0.0}, Vec2{-0.4, 0.9}, Vec2{-0.6, -0.7}};
    const auto r = steiner_point(a, P, {0.0, 0.0});

    Vec2 best{0.0, 0.0};
    double ebest = 1e300;
    for (int i = -200; i <= 200; ++i)
        for (int j = -200; j <= 200; ++j) {
            const Vec2 q{i / 200.0, j / 200.0};
            const double e = steiner_energy(a, P, q);
            if (e < ebest) {
                ebest = e;
                best = q;
            }
        }
    REQUIRE(dist(r.q, best) < 2.0 / 200.0);
    REQUIRE(r.energy <= ebest + 1e-12);

    // local optimality against random probes around the reported point
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-0.02, 0.02);
    for (int k = 0; k < 300; ++k) {
        const Vec2 probe = r.q + Vec2{u(rng), u(rng)};
        REQUIRE(r.energy <= steiner_energy(a, P, probe) + 1e-12);
    }
}

TEST_CASE("steiner point is translation equivariant", "[diagnostics]") {
    const auto a = Anisotropy::elliptic({1.8, 0.2, 1.0});
    const std::array<Vec2, 3> P{Vec2{1.0, 0.1}, Vec2{-0.5, 0.8}, Vec2{-0.4, -0.9}};
    const Vec2 w{12.5, -7.25};
    const auto r0 = steiner_point(a, P, {0.0, 0.0});
    const auto r1 = steiner_point(a, {P[0] + w, P[1] + w, P[2] + w}, w);
    REQUIRE(dist(r1.q, r0.q + w) < 1e-8);
    REQUIRE(r1.energy == Approx(r0.energy).epsilon(1e-10));
}

TEST_CASE("steiner point pins obtuse configurations to the vertex", "[diagnostics]") {
    // the middle point of a nearly collinear triple carries an angle close to
    // pi, far beyond the 2pi/3 threshold: the minimizer sits at the vertex
    const std::array<Vec2, 3> P{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{2.0, 0.05}};
    const auto r = steiner_point(Anisotropy::isotropic(), P, {0.9, 0.1});
    REQUIRE(r.degenerate);
    REQUIRE(r.q == P[1]);
}

TEST_CASE("steiner point requires distinct endpoints", "[diagnostics]") {
    const std::array<Vec2, 3> P{Vec2{0.0, 0.0}, Vec2{0.0, 0.0}, Vec2{1.0, 0.0}};
    REQUIRE_THROWS_AS(steiner_point(Anisotropy::isotropic(), P, {0.3, 0.1}), SpecViolation);
}
