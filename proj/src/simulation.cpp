#include "pmsm/simulation.hpp"

#include <cmath>
#include <cstdio>

#include "pmsm/errors.hpp"

namespace pmsm {

double electromagnetic_torque(const MotorState& s, const MotorParams& p) {
    const CurrentDQ i = current_from_flux(s.phi, p);
    const Vec2 psi_total{s.phi.d + p.lambda, s.phi.q};
    return 1.5 * p.n * i.vec().dot(skew_apply(psi_total));
}

StateDerivative derivatives(const MotorState& s, const SimInput& in, const MotorParams& p,
                            double dt_offset) {
    Vec2 u_dq = in.u;
    switch (in.frame) {
        case VoltageFrame::DQ:
            break;
        case VoltageFrame::GammaDelta: {
            const double theta_c = in.theta_c + in.omega_c * dt_offset;
            u_dq = rotate(in.u, -(s.theta - theta_c));
            break;
        }
        case VoltageFrame::AlphaBeta:
            u_dq = rotate(in.u, -s.theta);
            break;
    }
    const CurrentDQ i = current_from_flux(s.phi, p);
    const Vec2 psi_total{s.phi.d + p.lambda, s.phi.q};
    const Vec2 emf = skew_apply(psi_total) * s.omega;

    StateDerivative d;
    d.dphi.d = u_dq.x - p.R * i.d - emf.x;
    d.dphi.q = u_dq.y - p.R * i.q - emf.y;
    const double torque_term = 1.5 * i.vec().dot(skew_apply(psi_total));
    d.domega = (static_cast<double>(p.n) * p.n / p.J) * (torque_term - in.tau_L / p.n);
    d.dtheta = s.omega;
    return d;
}

namespace {

MotorState advance(const MotorState& s, const StateDerivative& d, double h) {
    MotorState out = s;
    out.phi.d += h * d.dphi.d;
    out.phi.q += h * d.dphi.q;
    out.omega += h * d.domega;
    out.theta += h * d.dtheta;
    return out;
}

}  // namespace

MotorState step(const MotorState& s, const SimInput& in, const MotorParams& p, double dt,
                double t) {
    if (!(dt > 0.0)) throw ConfigError("step: dt must be > 0");
    const StateDerivative k1 = derivatives(s, in, p, 0.0);
    const StateDerivative k2 = derivatives(advance(s, k1, 0.5 * dt), in, p, 0.5 * dt);
    const StateDerivative k3 = derivatives(advance(s, k2, 0.5 * dt), in, p, 0.5 * dt);
    const StateDerivative k4 = derivatives(advance(s, k3, dt), in, p, dt);

    MotorState out = s;
    out.phi.d += dt / 6.0 * (k1.dphi.d + 2.0 * k2.dphi.d + 2.0 * k3.dphi.d + k4.dphi.d);
    out.phi.q += dt / 6.0 * (k1.dphi.q + 2.0 * k2.dphi.q + 2.0 * k3.dphi.q + k4.dphi.q);
    out.omega += dt / 6.0 * (k1.domega + 2.0 * k2.domega + 2.0 * k3.domega + k4.domega);
    out.theta += dt / 6.0 * (k1.dtheta + 2.0 * k2.dtheta + 2.0 * k3.dtheta + k4.dtheta);

    if (!hessian_at_flux(out.phi, p).positive_definite()) {
        char buf[96];
        std::snprintf(buf, sizeof(buf),
                      "step: state left the magnetics validity region at t=%.9g s", t + dt);
        throw ValidityError(buf);
    }
    return out;
}

FluxDQ locked_rotor_step(const FluxDQ& phi, const Vec2& u_dq, const MotorParams& p, double dt) {
    if (!(dt > 0.0)) throw ConfigError("locked_rotor_step: dt must be > 0");
    const auto rhs = [&](const FluxDQ& f) -> Vec2 {
        const CurrentDQ i = current_from_flux(f, p);
        return {u_dq.x - p.R * i.d, u_dq.y - p.R * i.q};
    };
    const Vec2 k1 = rhs(phi);
    const Vec2 k2 = rhs({phi.d + 0.5 * dt * k1.x, phi.q + 0.5 * dt * k1.y});
    const Vec2 k3 = rhs({phi.d + 0.5 * dt * k2.x, phi.q + 0.5 * dt * k2.y});
    const Vec2 k4 = rhs({phi.d + dt * k3.x, phi.q + dt * k3.y});
    return {phi.d + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            phi.q + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)};
}

}  // namespace pmsm
