#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmsm/injection.hpp"
#include "pmsm/motor_params.hpp"
#include "pmsm/simulation.hpp"

namespace pmsm {

/// Piecewise-linear function of time given by sorted breakpoints.
class PiecewiseLinear {
  public:
    PiecewiseLinear() = default;
    PiecewiseLinear(std::vector<double> times, std::vector<double> values);

    double operator()(double t) const;
    bool empty() const { return times_.empty(); }

    /// Parse "t0:v0, t1:v1, ..." (times in seconds).
    static PiecewiseLinear parse(const std::string& text);

    const std::vector<double>& times() const { return times_; }
    const std::vector<double>& values() const { return values_; }

  private:
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Open-loop V/f scenario definition. The drive voltage is
///   u_gd = u_rd(t) + (0, omega_c(t) * lambda) + u_tilde f(Omega t),
/// where u_rd is the resistive compensation R * (i_hold(t), i_torque(t))
/// passed through a first-order low-pass, and the load torque target follows
/// the same low-pass (the bench load rig cannot step instantaneously).
struct ScenarioProfile {
    std::string name;
    double duration = 0.0;           ///< [s], after time scaling
    PiecewiseLinear omega_c;         ///< controller speed reference [rad/s el]
    PiecewiseLinear tau_load;        ///< load torque target [N m]
    PiecewiseLinear i_hold;          ///< gamma-axis holding current target [A]
    PiecewiseLinear i_torque;        ///< delta-axis torque current target [A]
    double filter_tau = 0.05;        ///< u_rd / load low-pass time constant [s]
};

/// Built-in names: rest, speed-reversal, load-step, long-test.
/// Profiles scale with the plant's rated speed/torque; `time_scale`
/// compresses the nominal durations (long-test nominal is 210 s, default
/// scale 0.1).
ScenarioProfile built_in_scenario(const std::string& name, const MotorParams& p,
                                  double time_scale = 1.0);
std::vector<std::string> built_in_scenario_names();

/// Load a profile from a key-value file (keys: duration, filter_tau, and
/// breakpoint lists omega_c, tau_load, i_hold, i_torque).
ScenarioProfile scenario_from_config(const KeyValueFile& kv);

struct RunOptions {
    double sample_rate = 4000.0;  ///< measurement rate [Hz]
    double internal_dt = 0.0;     ///< integrator step; 0 = 1/(40 * Omega/2pi)
    double noise_std = 0.0;       ///< additive white noise on sampled currents [A]
    std::uint64_t seed = 0;       ///< noise seed
};

/// Simulate the scenario under the V/f + injection law, sampling at the
/// measurement rate. Records true theta for later comparison.
/// Throws ValidityError/ConfigError on integrator or setup failure.
ScenarioTrace run_scenario(const ScenarioProfile& profile, const InjectionConfig& inj,
                           const MotorParams& p, const RunOptions& opts = {});

/// Variant exposing the full internal state for verification runs: returns
/// flux, speed and angles sampled at the measurement rate.
struct StateTrace {
    double sample_rate = 0.0;
    std::vector<double> t;
    std::vector<Vec2> phi_gd;
    std::vector<double> omega;
    std::vector<double> theta;    ///< unwrapped
    std::vector<double> theta_c;  ///< unwrapped
};
StateTrace run_scenario_states(const ScenarioProfile& profile, const InjectionConfig& inj,
                               const MotorParams& p, const RunOptions& opts = {},
                               const Vec2& phi_gd0 = {});

}  // namespace pmsm
