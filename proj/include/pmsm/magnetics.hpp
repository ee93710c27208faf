#pragma once

#include "pmsm/geometry.hpp"
#include "pmsm/motor_params.hpp"

namespace pmsm {

/// Flux linkage components [Wb]. Also reused in the gamma-delta frame.
struct FluxDQ {
    double d = 0.0;
    double q = 0.0;
    Vec2 vec() const { return {d, q}; }
};

/// Current components [A]. Also reused in other frames.
struct CurrentDQ {
    double d = 0.0;
    double q = 0.0;
    Vec2 vec() const { return {d, q}; }
};

/// Magnetic energy H(phi_d, phi_q):
/// quadratic part phi_d^2/(2 Ld) + phi_q^2/(2 Lq) plus the quartic saturation
/// terms a30 phi_d^3 + a12 phi_d phi_q^2 + a40 phi_d^4 + a22 phi_d^2 phi_q^2
/// + a04 phi_q^4. H(0,0) = 0 and H is even in phi_q.
double energy(const FluxDQ& phi, const MotorParams& p);

/// Flux-current magnetization curves: the gradient of `energy`,
///   i_d = phi_d/Ld + 3 a30 phi_d^2 + a12 phi_q^2 + 4 a40 phi_d^3 + 2 a22 phi_d phi_q^2
///   i_q = phi_q/Lq + 2 a12 phi_d phi_q + 2 a22 phi_d^2 phi_q + 4 a04 phi_q^3
CurrentDQ current_from_flux(const FluxDQ& phi, const MotorParams& p);

/// Hessian of `energy` at a flux point (the exact differential admittance).
SymMatrix2 hessian_at_flux(const FluxDQ& phi, const MotorParams& p);

/// Third derivatives of `energy` at a flux point: (ddd, ddq, dqq, qqq).
struct EnergyThirdDerivatives {
    double ddd = 0.0, ddq = 0.0, dqq = 0.0, qqq = 0.0;
};
EnergyThirdDerivatives energy_third_derivatives(const FluxDQ& phi, const MotorParams& p);

/// First-order-in-alpha inverse of the magnetization curves:
///   phi_d = Ld (i_d - 3 a30 Ld^2 i_d^2 - a12 Lq^2 i_q^2 - 4 a40 Ld^3 i_d^3
///               - 2 a22 Ld Lq^2 i_d i_q^2)
///   phi_q = Lq (i_q - 2 a12 Ld Lq i_d i_q - 2 a22 Ld^2 Lq i_d^2 i_q - 4 a04 Lq^3 i_q^3)
FluxDQ flux_from_current_approx(const CurrentDQ& i, const MotorParams& p);

struct NewtonStats {
    int iterations = 0;
    double residual = 0.0;  ///< final max-norm current residual [A]
};

/// Exact inverse of the magnetization curves by damped Newton iteration with
/// the analytic Hessian as Jacobian, seeded by flux_from_current_approx.
/// Satisfies |current_from_flux(phi) - i| <= tol component-wise.
/// Throws ConvergenceError (cap 50 iterations) or ValidityError when the
/// Hessian loses positive definiteness along the solve path.
FluxDQ flux_from_current_exact(const CurrentDQ& i, const MotorParams& p, double tol = 1e-10,
                               NewtonStats* stats = nullptr);

/// Closed-form first-order differential admittance G(i) (Hessian of `energy`
/// evaluated at the linear flux (Ld i_d, Lq i_q)):
///   G_dd = 1/Ld + 6 a30 Ld i_d + 12 a40 Ld^2 i_d^2 + 2 a22 Lq^2 i_q^2
///   G_dq = 2 a12 Lq i_q + 4 a22 Ld i_d Lq i_q
///   G_qq = 1/Lq + 2 a12 Ld i_d + 2 a22 Ld^2 i_d^2 + 12 a04 Lq^2 i_q^2
SymMatrix2 admittance(const CurrentDQ& i, const MotorParams& p);

/// Differential admittance evaluated at the exactly inverted flux,
/// hessian_at_flux(flux_from_current_exact(i)). More accurate than the
/// first-order closed form at deep saturation.
SymMatrix2 admittance_exact(const CurrentDQ& i, const MotorParams& p);

/// Differential inductance matrix: inverse of admittance(i).
/// Throws ValidityError when admittance(i) is not positive definite.
SymMatrix2 inductance(const CurrentDQ& i, const MotorParams& p);

/// Saliency matrix S(mu, i) = M_mu * G(M_mu^T i) * M_mu^T with the first-order
/// closed-form admittance. Symmetric because G is.
Mat22 saliency_matrix(double mu, const CurrentDQ& i_gd, const MotorParams& p);

/// Saliency matrix with the exactly inverted operating flux,
/// S(mu, i) = M_mu * hessian_at_flux(flux_from_current_exact(M_mu^T i)) * M_mu^T.
Mat22 saliency_matrix_exact(double mu, const CurrentDQ& i_gd, const MotorParams& p);

}  // namespace pmsm
