#pragma once

#include <vector>

#include "pmsm/geometry.hpp"
#include "pmsm/magnetics.hpp"

namespace pmsm {

/// Electromechanical state with flux linkage as the electrical state.
/// theta accumulates unwrapped; wrap on output only.
struct MotorState {
    FluxDQ phi;         ///< current-linked flux, dq frame [Wb]
    double omega = 0.0; ///< electrical speed [rad/s]
    double theta = 0.0; ///< electrical angle [rad], unwrapped
};

enum class VoltageFrame { DQ, GammaDelta, AlphaBeta };

/// One-step input: voltage with its frame tag, load torque, and the
/// controller angle/speed needed to interpret gamma-delta voltages.
struct SimInput {
    Vec2 u;                               ///< voltage [V]
    VoltageFrame frame = VoltageFrame::DQ;
    double tau_L = 0.0;                   ///< load torque [N m]
    double theta_c = 0.0;                 ///< controller angle [rad] (gamma-delta)
    double omega_c = 0.0;                 ///< controller speed [rad/s] (gamma-delta)
};

struct StateDerivative {
    FluxDQ dphi;
    double domega = 0.0;
    double dtheta = 0.0;
};

/// Electromagnetic torque (3/2) n i^T K (phi + phi_m) [N m].
double electromagnetic_torque(const MotorState& s, const MotorParams& p);

/// Right-hand side of the flux-state model:
///   dphi/dt  = u_dq - R i_dq - omega K (phi + phi_m)
///   (J/n^2) domega/dt = (3/2) i^T K (phi + phi_m) - tau_L / n
///   dtheta/dt = omega
/// with i_dq = current_from_flux(phi). `dt_offset` advances theta_c by
/// omega_c * dt_offset when interpreting gamma-delta inputs at RK stage times.
StateDerivative derivatives(const MotorState& s, const SimInput& in, const MotorParams& p,
                            double dt_offset = 0.0);

/// Classical fixed-step RK4 advance with the input held over the step
/// (controller angle advances linearly inside the step for gamma-delta
/// inputs). Deterministic. Throws ValidityError when the state leaves the
/// magnetics validity region, naming the time stamp.
MotorState step(const MotorState& s, const SimInput& in, const MotorParams& p, double dt,
                double t = 0.0);

/// Locked-rotor electrical dynamics dphi/dt = u_dq - R i_dq (theta = 0,
/// omega = 0), single RK4 step.
FluxDQ locked_rotor_step(const FluxDQ& phi, const Vec2& u_dq, const MotorParams& p, double dt);

/// One sampled record of a scenario run.
struct TraceRecord {
    double t = 0.0;
    Vec2 u_gd;       ///< commanded gamma-delta voltage at the sample instant [V]
    Vec2 i_gd;       ///< measured gamma-delta current [A]
    Vec2 i_ab;       ///< measured alpha-beta current [A]
    double theta = 0.0;    ///< true electrical angle, wrapped [rad]
    double omega = 0.0;    ///< electrical speed [rad/s]
    double theta_c = 0.0;  ///< controller angle, wrapped [rad]
    double tau_L = 0.0;    ///< applied load torque [N m]
};

/// Uniformly sampled scenario record; strictly increasing timestamps at a
/// constant step (4 kHz default). Immutable after a run.
struct ScenarioTrace {
    double sample_rate = 0.0;  ///< [Hz]
    std::vector<TraceRecord> records;
};

}  // namespace pmsm
