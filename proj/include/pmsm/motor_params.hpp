#pragma once

#include <string>

#include "pmsm/config_file.hpp"

namespace pmsm {

/// Electrical, mechanical and magnetic-saturation parameters of one machine.
///
/// The five saturation coefficients are stored raw (SI units such that each
/// alpha * flux-monomial has ampere dimension). Data sheets usually quote the
/// dimensionless products a30*Ld^2*In, a12*Ld*Lq*In, a40*Ld^3*In^2,
/// a22*Ld*Lq^2*In^2, a04*Lq^3*In^2; use from_normalized() for those.
struct MotorParams {
    double R = 0.0;       ///< stator resistance [ohm]
    int n = 1;            ///< pole pairs
    double lambda = 0.0;  ///< permanent-magnet flux, peak [Wb]
    double Ld = 0.0;      ///< unsaturated d-axis inductance [H]
    double Lq = 0.0;      ///< unsaturated q-axis inductance [H]
    double a30 = 0.0;     ///< saturation coefficient alpha_{3,0}
    double a12 = 0.0;     ///< saturation coefficient alpha_{1,2}
    double a40 = 0.0;     ///< saturation coefficient alpha_{4,0}
    double a22 = 0.0;     ///< saturation coefficient alpha_{2,2}
    double a04 = 0.0;     ///< saturation coefficient alpha_{0,4}
    double J = 0.0;       ///< rotor inertia [kg m^2]
    double In = 0.0;      ///< rated peak current [A], used for normalized reporting
    double omega_rated = 0.0;  ///< rated electrical speed [rad/s]; 0 = unknown
                               ///< (only speed-profiled scenarios need it)

    static MotorParams from_normalized(double R, int n, double lambda, double Ld, double Lq,
                                       double a30n, double a12n, double a40n, double a22n,
                                       double a04n, double J, double In);

    /// Copy with all five saturation coefficients set to zero.
    MotorParams without_saturation() const;

    /// Dimensionless products in data-sheet form.
    double a30_norm() const { return a30 * Ld * Ld * In; }
    double a12_norm() const { return a12 * Ld * Lq * In; }
    double a40_norm() const { return a40 * Ld * Ld * Ld * In * In; }
    double a22_norm() const { return a22 * Ld * Lq * Lq * In * In; }
    double a04_norm() const { return a04 * Lq * Lq * Lq * In * In; }

    /// Rated torque implied by rated current on the q axis, (3/2) n lambda In [N m].
    double rated_torque() const { return 1.5 * n * lambda * In; }

    /// Throws ConfigError when an invariant (R, Ld, Lq, J > 0, ...) is violated.
    void validate() const;

    /// Keys: R, n, lambda, Ld, Lq, J, In plus either raw a30..a04 or
    /// normalized a30_norm..a04_norm.
    static MotorParams from_config(const KeyValueFile& kv);
    static MotorParams load(const std::string& path);
    KeyValueFile to_config() const;
};

}  // namespace pmsm
