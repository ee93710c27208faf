#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pmsm/identification.hpp"
#include "pmsm/injection.hpp"
#include "pmsm/scenarios.hpp"

namespace pmsm {

/// Resolve "square" / "sine" / a table-file path.
Waveform make_waveform(const std::string& spec);

/// Shared run settings for the CLI subcommands.
struct RunConfig {
    std::string motor_path;          ///< key-value motor config
    std::string scenario = "rest";   ///< built-in name or profile file path
    double omega_inj_hz = 500.0;
    std::optional<double> u_tilde;   ///< gamma-axis amplitude [V]; unset = default
    std::string waveform = "square";
    bool no_saturation = false;      ///< zero the alphas (plant or estimator model)
    double noise_std = 0.0;          ///< [A] on sampled currents
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    double time_scale = 0.0;         ///< 0 = per-scenario default
    double sample_rate = 4000.0;
};

/// Simulate a scenario, write `trace.csv` (+ `trace.csv.meta` with the
/// injection settings) into out_dir. Returns the trace path.
std::string cmd_simulate(const RunConfig& cfg);

struct EstimateConfig {
    std::string trace_path;
    std::string motor_path;
    double omega_inj_hz = 0.0;       ///< 0 = sidecar value, then 500
    std::optional<double> u_tilde;   ///< unset = sidecar value, then 15
    std::string waveform;            ///< "" = sidecar value, then square
    bool no_saturation = false;      ///< alphas = 0 in the estimator model only
    bool first_order_saliency = false;
    bool no_ripple_correction = false;
    bool no_demod_smoothing = false;
    double theta_smoother_tau = 0.0; ///< optional first-order smoother [s]; 0 = off
    std::string out_dir = ".";
};

struct EstimateSummary {
    std::size_t rows = 0;         ///< input trace rows
    std::size_t estimated = 0;    ///< rows with a defined estimate
    double max_err_deg = 0.0;     ///< max |theta_hat - theta| [deg el]
    double mean_err_deg = 0.0;
    double max_err_mod_pi_deg = 0.0;  ///< same, modulo the two-fold ambiguity
    double ambiguity_rate = 0.0;  ///< fraction of estimates with the flag set
    std::string csv_path;
};

/// Demodulate + estimate over a trace CSV; writes `estimates.csv` with the
/// demodulation and estimation columns appended and prints the error summary
/// in electrical degrees. Estimates are time-aligned to the center of their
/// demodulation window. An empty trace produces an empty output and succeeds.
EstimateSummary cmd_estimate(const EstimateConfig& cfg);

struct IdentifyCmdConfig {
    std::string motor_path;
    double omega_inj_hz = 500.0;
    std::optional<double> u_amp;  ///< HF amplitude [V]; unset = motor key id_u_tilde, then 15
    std::string waveform = "square";
    bool no_saturation = false;   ///< identify a linearized plant
    bool first_order_only = false;  ///< skip the self-consistent refinement
    int levels = 9;
    std::string out_dir = ".";
};

/// Locked-rotor identification of the configured plant; writes
/// `id_report.cfg`, `identified_motor.cfg` and fitted-vs-measured curve CSVs.
IdReport cmd_identify(const IdentifyCmdConfig& cfg);

struct AveragingCheckConfig {
    std::string motor_path;
    double omega_inj_hz = 500.0;
    std::optional<double> u_amp;
    std::string waveform = "square";
    double duration = 0.32;
    double internal_dt = 2.5e-6;
    double sample_rate = 40000.0;
    std::string out_dir = ".";
};

struct AveragingReport {
    double theta_dev_base = 0.0;    ///< max |theta - theta_slow|, base Omega [rad]
    double theta_dev_double = 0.0;  ///< same at 2 Omega
    double theta_dev_ratio = 0.0;   ///< base / double; ~4 expected
    double ripple_amp = 0.0;        ///< measured flux ripple amplitude [Wb]
    double ripple_amp_model = 0.0;  ///< |u_tilde|/Omega * max F
    double ripple_rel_err = 0.0;
    double model_resid_base = 0.0;  ///< ripple-model residual, base Omega [Wb]
    double model_resid_double = 0.0;
    double model_resid_ratio = 0.0; ///< ~4 expected
};

/// Run the same short transient at Omega and 2*Omega (and without injection),
/// report the injection-effect scalings; writes `averaging_check.cfg`.
AveragingReport cmd_averaging_check(const AveragingCheckConfig& cfg);

}  // namespace pmsm
