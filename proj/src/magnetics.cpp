#include "pmsm/magnetics.hpp"

#include <cmath>
#include <cstdio>

#include "pmsm/errors.hpp"

namespace pmsm {

double energy(const FluxDQ& phi, const MotorParams& p) {
    const double pd = phi.d, pq = phi.q;
    const double pd2 = pd * pd, pq2 = pq * pq;
    return pd2 / (2.0 * p.Ld) + pq2 / (2.0 * p.Lq)
         + p.a30 * pd2 * pd + p.a12 * pd * pq2
         + p.a40 * pd2 * pd2 + p.a22 * pd2 * pq2 + p.a04 * pq2 * pq2;
}

CurrentDQ current_from_flux(const FluxDQ& phi, const MotorParams& p) {
    const double pd = phi.d, pq = phi.q;
    const double pd2 = pd * pd, pq2 = pq * pq;
    CurrentDQ i;
    i.d = pd / p.Ld + 3.0 * p.a30 * pd2 + p.a12 * pq2 + 4.0 * p.a40 * pd2 * pd
        + 2.0 * p.a22 * pd * pq2;
    i.q = pq / p.Lq + 2.0 * p.a12 * pd * pq + 2.0 * p.a22 * pd2 * pq + 4.0 * p.a04 * pq2 * pq;
    return i;
}

SymMatrix2 hessian_at_flux(const FluxDQ& phi, const MotorParams& p) {
    const double pd = phi.d, pq = phi.q;
    SymMatrix2 g;
    g.dd = 1.0 / p.Ld + 6.0 * p.a30 * pd + 12.0 * p.a40 * pd * pd + 2.0 * p.a22 * pq * pq;
    g.dq = 2.0 * p.a12 * pq + 4.0 * p.a22 * pd * pq;
    g.qq = 1.0 / p.Lq + 2.0 * p.a12 * pd + 2.0 * p.a22 * pd * pd + 12.0 * p.a04 * pq * pq;
    return g;
}

EnergyThirdDerivatives energy_third_derivatives(const FluxDQ& phi, const MotorParams& p) {
    EnergyThirdDerivatives t;
    t.ddd = 6.0 * p.a30 + 24.0 * p.a40 * phi.d;
    t.ddq = 4.0 * p.a22 * phi.q;
    t.dqq = 2.0 * p.a12 + 4.0 * p.a22 * phi.d;
    t.qqq = 24.0 * p.a04 * phi.q;
    return t;
}

FluxDQ flux_from_current_approx(const CurrentDQ& i, const MotorParams& p) {
    const double id = i.d, iq = i.q;
    const double Ld = p.Ld, Lq = p.Lq;
    FluxDQ phi;
    phi.d = Ld * (id - 3.0 * p.a30 * Ld * Ld * id * id - p.a12 * Lq * Lq * iq * iq
                  - 4.0 * p.a40 * Ld * Ld * Ld * id * id * id
                  - 2.0 * p.a22 * Ld * Lq * Lq * id * iq * iq);
    phi.q = Lq * (iq - 2.0 * p.a12 * Ld * Lq * id * iq - 2.0 * p.a22 * Ld * Ld * Lq * id * id * iq
                  - 4.0 * p.a04 * Lq * Lq * Lq * iq * iq * iq);
    return phi;
}

namespace {

std::string current_str(const CurrentDQ& i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%.6g, %.6g) A", i.d, i.q);
    return buf;
}

}  // namespace

FluxDQ flux_from_current_exact(const CurrentDQ& i, const MotorParams& p, double tol,
                               NewtonStats* stats) {
    if (!(tol > 0.0)) throw ConfigError("flux_from_current_exact: tol must be > 0");
    FluxDQ phi = flux_from_current_approx(i, p);
    const Vec2 target = i.vec();
    constexpr int kMaxIter = 50;
    double res = (current_from_flux(phi, p).vec() - target).max_abs();
    int it = 0;
    while (res > tol) {
        if (it++ >= kMaxIter)
            throw ConvergenceError("flux_from_current_exact: no convergence within 50 iterations at i=" +
                                   current_str(i));
        const SymMatrix2 g = hessian_at_flux(phi, p);
        if (!g.positive_definite())
            throw ValidityError("flux_from_current_exact: admittance not positive definite at i=" +
                                current_str(i) + " (outside model validity region)");
        const Vec2 r = current_from_flux(phi, p).vec() - target;
        const double det = g.det();
        const Vec2 step{(g.qq * r.x - g.dq * r.y) / det, (g.dd * r.y - g.dq * r.x) / det};
        // damped update: backtrack until the residual decreases
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            const FluxDQ cand{phi.d - lambda * step.x, phi.q - lambda * step.y};
            const double cres = (current_from_flux(cand, p).vec() - target).max_abs();
            if (cres < res) {
                phi = cand;
                res = cres;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted)
            throw ConvergenceError("flux_from_current_exact: line search stalled at i=" +
                                   current_str(i));
    }
    if (stats) {
        stats->iterations = it;
        stats->residual = res;
    }
    return phi;
}

SymMatrix2 admittance(const CurrentDQ& i, const MotorParams& p) {
    return hessian_at_flux({p.Ld * i.d, p.Lq * i.q}, p);
}

SymMatrix2 admittance_exact(const CurrentDQ& i, const MotorParams& p) {
    return hessian_at_flux(flux_from_current_exact(i, p), p);
}

SymMatrix2 inductance(const CurrentDQ& i, const MotorParams& p) {
    const SymMatrix2 g = admittance(i, p);
    if (!g.positive_definite())
        throw ValidityError("inductance: admittance not positive definite at i=" + current_str(i) +
                            " (outside model validity region)");
    const double det = g.det();
    return {g.qq / det, -g.dq / det, g.dd / det};
}

namespace {

Mat22 rotate_sym(double mu, const SymMatrix2& g) {
    const Mat22 m = rotation(mu);
    return m * g.full() * m.transpose();
}

}  // namespace

Mat22 saliency_matrix(double mu, const CurrentDQ& i_gd, const MotorParams& p) {
    const Vec2 idq = rotate(i_gd.vec(), -mu);
    return rotate_sym(mu, admittance({idq.x, idq.y}, p));
}

Mat22 saliency_matrix_exact(double mu, const CurrentDQ& i_gd, const MotorParams& p) {
    const Vec2 idq = rotate(i_gd.vec(), -mu);
    return rotate_sym(mu, admittance_exact({idq.x, idq.y}, p));
}

}  // namespace pmsm
