#pragma once

#include <string>
#include <vector>

#include "pmsm/config_file.hpp"
#include "pmsm/injection.hpp"
#include "pmsm/magnetics.hpp"
#include "pmsm/motor_params.hpp"

namespace pmsm {

/// One locked-rotor operating point: DC and HF voltages applied, steady
/// demodulated currents measured.
struct IdPoint {
    Vec2 u_bar;         ///< DC voltage [V]
    Vec2 u_tilde;       ///< HF amplitude [V]
    CurrentDQ i_bar;    ///< steady slow current [A]
    CurrentDQ i_tilde;  ///< steady ripple amplitude [A]
};

struct IdExperimentOptions {
    double settle = 0.0;        ///< [s]; 0 = 10 electrical time constants
    int measure_periods = 8;    ///< demodulated tail length
    double sample_rate = 4000.0;
    double internal_dt = 0.0;   ///< 0 = injection period / 40
    /// steady-state gate: relative change of i_bar per injection period,
    /// checked over the last five periods
    double steady_tol = 1e-4;
};

/// Drive the locked-rotor plant with u = u_bar + u_tilde f(Omega t), wait for
/// steady state, demodulate the tail. Throws ConvergenceError (suggesting a
/// longer settle) when the slow current has not settled.
IdPoint run_id_experiment(const Vec2& u_bar, const Vec2& u_tilde, const InjectionConfig& cfg,
                          const MotorParams& plant, const IdExperimentOptions& opts = {});

/// Ld = u_tilde_d / (Omega i_tilde_d), Lq likewise, averaged over points with
/// u_bar = 0 (at least one d-excited and one q-excited point required).
struct LdLqEstimate {
    double Ld = 0.0;
    double Lq = 0.0;
    int points_d = 0;
    int points_q = 0;
};
LdLqEstimate estimate_Ld_Lq(const std::vector<IdPoint>& points, double omega_inj);

/// Known contributions subtracted from a regression's left-hand side when the
/// sub-fits run on refined (flux-equivalent) data; all zero on the raw pass.
struct KnownCoefficients {
    double a30 = 0.0, a12 = 0.0, a40 = 0.0, a22 = 0.0, a04 = 0.0;
};

struct FitResult {
    double value_a = 0.0;   ///< first fitted coefficient
    double value_b = 0.0;   ///< second fitted coefficient (when applicable)
    double residual = 0.0;  ///< least-squares residual norm
    int points = 0;
};

/// Joint linear least squares for (a30, a40) on
///   Omega i_tilde_d / u_tilde_d - 1/Ld = 6 a30 Ld i_d + 12 a40 Ld^2 i_d^2
/// over d-axis points (u_bar_q = 0, u_tilde_q = 0). Requires >= 3 distinct
/// i_bar_d values spanning both signs.
FitResult fit_d_axis(const std::vector<IdPoint>& points, double Ld, double omega_inj);

/// a22 from the i_tilde_d relation and a12 from the i_tilde_q relation over
/// cross points (u_bar_d = 0, u_tilde_q = 0): value_a = a22, value_b = a12.
FitResult fit_cross_terms(const std::vector<IdPoint>& points, double Ld, double Lq,
                          double omega_inj, const KnownCoefficients& known = {});

/// a12 from the i_tilde_d relation (value_a) and a04 from the i_tilde_q
/// relation (value_b) over q-axis points (u_bar_d = 0, u_tilde_d = 0).
FitResult fit_q_axis(const std::vector<IdPoint>& points, double Ld, double Lq,
                     double omega_inj, const KnownCoefficients& known = {});

struct IdSweepConfig {
    double u_amp = 15.0;        ///< HF amplitude [V]
    int levels = 9;             ///< DC levels per family over +-2 In
    double max_current = 0.0;   ///< sweep extent [A]; 0 = 2 * In
    IdExperimentOptions experiment;
};

struct IdentifyOptions {
    /// Refine the raw first-order fits by re-running them on flux-equivalent
    /// currents from the exact inverse, with the ripple-filter and
    /// ripple-rectification corrections applied to the measured points.
    bool refine = true;
    int max_refine_iterations = 12;
    double refine_tol = 1e-10;  ///< relative parameter change
    /// Warn when the two a12 estimates disagree by more than this fraction.
    double a12_spread_warning = 0.10;
};

/// Identification report: fitted parameters in raw and normalized form, the
/// two independent a12 estimates, residual norms and point counts.
struct IdReport {
    double Ld = 0.0, Lq = 0.0;
    double a30 = 0.0, a12 = 0.0, a40 = 0.0, a22 = 0.0, a04 = 0.0;
    double a12_from_cross = 0.0;  ///< via the cross-family ripple relation
    double a12_from_q = 0.0;      ///< via the q-family ripple relation
    double a12_spread = 0.0;      ///< |cross - q| / average
    bool a12_warning = false;
    double resid_d = 0.0, resid_cross = 0.0, resid_q = 0.0;
    int points_total = 0;
    int refine_iterations = 0;
    /// Raw single-pass (paper-style) values kept for reference.
    double raw_Ld = 0.0, raw_Lq = 0.0;
    double raw_a30 = 0.0, raw_a12 = 0.0, raw_a40 = 0.0, raw_a22 = 0.0, raw_a04 = 0.0;

    /// Fitted parameter set as MotorParams (R, n, lambda, J, In copied from
    /// the plant; refined or raw per `refined`).
    MotorParams as_params(const MotorParams& plant, bool refined = true) const;
    KeyValueFile to_config(const MotorParams& plant) const;
};

/// Families of measured sweep points, kept for curve emission.
struct IdSweepData {
    std::vector<IdPoint> l_points;      ///< u_bar = 0
    std::vector<IdPoint> d_points;      ///< d-axis DC sweep, HF on d
    std::vector<IdPoint> cross_points;  ///< q-axis DC sweep, HF on d
    std::vector<IdPoint> q_points;      ///< q-axis DC sweep, HF on q
};

/// Run the four sweep families on the simulated locked-rotor plant.
IdSweepData run_id_sweeps(const MotorParams& plant, const InjectionConfig& base_cfg,
                          const IdSweepConfig& sweep);

/// Full locked-rotor identification: sweeps, the four sub-fits, optional
/// self-consistent refinement. a12 reported as the average of its two
/// estimates. Any sub-fit failure aborts with context.
IdReport identify_full(const MotorParams& plant, const InjectionConfig& base_cfg,
                       const IdSweepConfig& sweep = {}, const IdentifyOptions& opts = {},
                       IdSweepData* data_out = nullptr);

/// Re-run the fits on already-measured sweep data.
IdReport fit_sweep_data(const IdSweepData& data, const InjectionConfig& base_cfg,
                        const MotorParams& plant_ref, const IdentifyOptions& opts = {});

}  // namespace pmsm
