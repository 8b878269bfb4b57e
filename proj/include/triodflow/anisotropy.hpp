#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "triodflow/errors.hpp"
#include "triodflow/vec2.hpp"

namespace triodflow {

// Symmetric 2x2 matrix for the quadratic family.
struct SymMat2 {
    double a11 = 1.0;
    double a12 = 0.0;
    double a22 = 1.0;

    Vec2 apply(Vec2 v) const { return {a11 * v.x + a12 * v.y, a12 * v.x + a22 * v.y}; }
    bool operator==(const SymMat2&) const = default;
};

struct PhiDerivs {
    double phi;
    double dphi;
    double ddphi;
};

// An anisotropy is the polar norm phi^o, represented through its angle
// function phi(theta) = phi^o(cos theta, sin theta). Everything the flow
// needs (phi^o, its gradient, psi, Wulff boundary) comes from phi, phi',
// phi'' on the circle plus 1-homogeneity.
class Anisotropy {
  public:
    enum class Family { Isotropic, Fourier, EllipticQuadratic };

    static Anisotropy isotropic() { return Anisotropy(Family::Isotropic); }

    // phi(theta) = 1 + a*cos(k*(theta - theta0)); elliptic iff |a|(k^2-1) < 1,
    // certified by ellipticity_bounds, not at construction.
    static Anisotropy fourier(double a, int k, double theta0) {
        if (k < 2) throw SpecViolation("fourier frequency k must be >= 2");
        Anisotropy r(Family::Fourier);
        r.a_ = a;
        r.k_ = k;
        r.theta0_ = theta0;
        return r;
    }

    // phi^o(x) = sqrt(x^T A x), A symmetric positive definite.
    static Anisotropy elliptic(SymMat2 A) {
        if (A.a11 <= 0.0 || A.a11 * A.a22 - A.a12 * A.a12 <= 0.0)
            throw SpecViolation("elliptic matrix A must be positive definite");
        Anisotropy r(Family::EllipticQuadratic);
        r.A_ = A;
        return r;
    }

    Family family() const { return family_; }
    double fourier_a() const { return a_; }
    int fourier_k() const { return k_; }
    double fourier_theta0() const { return theta0_; }
    const SymMat2& matrix() const { return A_; }
    bool operator==(const Anisotropy&) const = default;

    // phi(theta) and its first two derivatives, closed form per family.
    PhiDerivs phi_theta(double theta) const {
        switch (family_) {
        case Family::Isotropic:
            return {1.0, 0.0, 0.0};
        case Family::Fourier: {
            const double c = std::cos(k_ * (theta - theta0_));
            const double s = std::sin(k_ * (theta - theta0_));
            return {1.0 + a_ * c, -a_ * k_ * s, -a_ * k_ * k_ * c};
        }
        case Family::EllipticQuadratic: {
            const Vec2 nu{std::cos(theta), std::sin(theta)};
            const Vec2 nut = perp(nu); // d nu / d theta
            const double g = dot(nu, A_.apply(nu));
            const double dg = 2.0 * dot(nut, A_.apply(nu));
            const double ddg = -2.0 * dot(nu, A_.apply(nu)) + 2.0 * dot(nut, A_.apply(nut));
            const double phi = std::sqrt(g);
            const double dphi = dg / (2.0 * phi);
            const double ddphi = ddg / (2.0 * phi) - dg * dg / (4.0 * g * phi);
            return {phi, dphi, ddphi};
        }
        }
        return {1.0, 0.0, 0.0};
    }

    // phi^o(v) by 1-homogeneity; phi^o(0) = 0 exactly.
    double polar_eval(Vec2 v) const {
        const double r = norm(v);
        if (r == 0.0) return 0.0;
        return r * phi_theta(std::atan2(v.y, v.x)).phi;
    }

    // D phi^o(v) = phi(theta) nu - phi'(theta) tau with nu = v/|v|,
    // tau = (sin theta, -cos theta); 0-homogeneous.
    Vec2 polar_grad(Vec2 v) const {
        const double r = norm(v);
        if (r == 0.0) throw ZeroVector("polar_grad at v = 0");
        const double theta = std::atan2(v.y, v.x);
        const auto d = phi_theta(theta);
        const Vec2 nu = v / r;
        const Vec2 tau = -perp(nu); // (sin, -cos)
        return d.phi * nu - d.dphi * tau;
    }

    // psi(theta) = phi (phi + phi'') = phi^o(nu) * (D^2 phi^o(nu) tau . tau)
    double psi(double theta) const {
        const auto d = phi_theta(theta);
        return d.phi * (d.phi + d.ddphi);
    }

    // (m, M) = extrema of psi over a dense theta grid; the flow's parabolic
    // coefficient lives in [m, M]. Throws NotElliptic (naming the violating
    // theta) if min psi <= 0 or phi <= 0 anywhere.
    std::pair<double, double> ellipticity_bounds(int n_samples = 3600) const {
        if (n_samples < 360) throw SpecViolation("ellipticity_bounds needs n_samples >= 360");
        double m = 0.0, M = 0.0;
        for (int j = 0; j < n_samples; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / n_samples;
            const auto d = phi_theta(theta);
            if (d.phi <= 0.0)
                throw NotElliptic("phi(theta) <= 0 at theta=" + std::to_string(theta));
            const double p = d.phi * (d.phi + d.ddphi);
            if (p <= 0.0)
                throw NotElliptic("psi(theta) <= 0 at theta=" + std::to_string(theta));
            if (j == 0) {
                m = M = p;
            } else {
                m = std::min(m, p);
                M = std::max(M, p);
            }
        }
        return {m, M};
    }

    // n samples of the Wulff boundary {phi = 1}: points D phi^o(nu(theta_j)),
    // theta_j uniform on [0, 2pi). Convex for elliptic anisotropies.
    std::vector<Vec2> wulff_boundary(int n) const {
        if (n < 8) throw SpecViolation("wulff_boundary needs n >= 8");
        ellipticity_bounds(3600); // certify ellipticity, propagate NotElliptic
        std::vector<Vec2> pts;
        pts.reserve(n);
        for (int j = 0; j < n; ++j) {
            const double theta = 2.0 * std::numbers::pi * j / n;
            pts.push_back(polar_grad({std::cos(theta), std::sin(theta)}));
        }
        return pts;
    }

  private:
    explicit Anisotropy(Family f) : family_(f) {}

    Family family_;
    double a_ = 0.0;
    int k_ = 0;
    double theta0_ = 0.0;
    SymMat2 A_;
};

} // namespace triodflow
