#include "pmsm/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "pmsm/csv_io.hpp"
#include "pmsm/demodulation.hpp"
#include "pmsm/errors.hpp"
#include "pmsm/estimator.hpp"

namespace pmsm {

namespace {

namespace fs = std::filesystem;

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory: " + dir);
}

constexpr double kDefaultScenarioAmp = 15.0;  // V, gamma axis

}  // namespace

Waveform make_waveform(const std::string& spec) {
    if (spec.empty() || spec == "square") return Waveform::square();
    if (spec == "sine") return Waveform::sine();
    return Waveform::from_table_file(spec);
}

std::string cmd_simulate(const RunConfig& cfg) {
    MotorParams p = MotorParams::load(cfg.motor_path);
    if (cfg.no_saturation) p = p.without_saturation();

    ScenarioProfile profile;
    const auto names = built_in_scenario_names();
    if (std::find(names.begin(), names.end(), cfg.scenario) != names.end())
        profile = built_in_scenario(cfg.scenario, p, cfg.time_scale);
    else
        profile = scenario_from_config(KeyValueFile::load(cfg.scenario));

    InjectionConfig inj;
    inj.omega = kTwoPi * cfg.omega_inj_hz;
    inj.waveform = make_waveform(cfg.waveform);
    double amp;
    if (cfg.u_tilde.has_value())
        amp = *cfg.u_tilde;
    else if (cfg.scenario == "rest")
        amp = 0.0;
    else
        amp = kDefaultScenarioAmp;
    inj.u_tilde = {amp, 0.0};

    RunOptions opts;
    opts.sample_rate = cfg.sample_rate;
    opts.noise_std = cfg.noise_std;
    opts.seed = cfg.seed;
    const ScenarioTrace trace = run_scenario(profile, inj, p, opts);

    ensure_dir(cfg.out_dir);
    const std::string path = join(cfg.out_dir, "trace.csv");
    write_trace_csv(trace, path);

    KeyValueFile meta;
    meta.set("omega_inj_hz", cfg.omega_inj_hz);
    meta.set("u_tilde_gamma", amp);
    meta.set("u_tilde_delta", 0.0);
    meta.set("waveform", cfg.waveform.empty() ? "square" : cfg.waveform);
    meta.set("scenario", profile.name);
    meta.set("sample_rate", cfg.sample_rate);
    meta.save(path + ".meta");
    return path;
}

EstimateSummary cmd_estimate(const EstimateConfig& cfg) {
    MotorParams p = MotorParams::load(cfg.motor_path);
    if (cfg.no_saturation) p = p.without_saturation();
    const ScenarioTrace trace = read_trace_csv(cfg.trace_path);

    // injection settings: flags win, then the sidecar, then defaults
    double omega_hz = cfg.omega_inj_hz;
    double amp = cfg.u_tilde.value_or(0.0);
    bool amp_set = cfg.u_tilde.has_value();
    std::string waveform = cfg.waveform;
    const std::string meta_path = cfg.trace_path + ".meta";
    if (fs::exists(meta_path)) {
        const KeyValueFile meta = KeyValueFile::load(meta_path);
        if (omega_hz <= 0.0) omega_hz = meta.get_double_or("omega_inj_hz", 0.0);
        if (!amp_set && meta.has("u_tilde_gamma")) {
            amp = meta.get_double("u_tilde_gamma");
            amp_set = true;
        }
        if (waveform.empty()) waveform = meta.maybe("waveform").value_or("");
    }
    if (omega_hz <= 0.0) omega_hz = 500.0;
    if (!amp_set) amp = kDefaultScenarioAmp;

    InjectionConfig inj;
    inj.omega = kTwoPi * omega_hz;
    inj.u_tilde = {amp, 0.0};
    inj.waveform = make_waveform(waveform);

    ensure_dir(cfg.out_dir);
    const std::string out_path = join(cfg.out_dir, "estimates.csv");

    CsvTable out;
    out.columns = {"t", "u_gamma", "u_delta", "i_gamma", "i_delta", "i_alpha", "i_beta",
                   "theta", "omega", "theta_c", "tau_L",
                   "i_bar_g", "i_bar_d", "i_tilde_g", "i_tilde_d",
                   "theta_hat", "residual", "ambiguity"};
    const double nan = std::nan("");
    for (const TraceRecord& r : trace.records)
        out.rows.push_back({r.t, r.u_gd.x, r.u_gd.y, r.i_gd.x, r.i_gd.y, r.i_ab.x, r.i_ab.y,
                            r.theta, r.omega, r.theta_c, r.tau_L,
                            nan, nan, nan, nan, nan, nan, -1.0});

    EstimateSummary summary;
    summary.rows = trace.records.size();
    summary.csv_path = out_path;
    if (trace.records.size() < 2) {
        write_csv(out, out_path);
        std::printf("estimate: empty trace, no samples to process\n");
        return summary;
    }

    std::vector<double> ts;
    std::vector<Vec2> is;
    ts.reserve(trace.records.size());
    for (const TraceRecord& r : trace.records) {
        ts.push_back(r.t);
        is.push_back(r.i_gd);
    }

    std::vector<DemodulatedCurrents> dem = demodulate(ts, is, inj);
    const int nper = static_cast<int>(std::lround(trace.sample_rate * inj.period()));
    int first_index = nper;  // demod output k corresponds to trace row k + nper
    int align = nper / 2;    // window-center group delay in samples
    if (!cfg.no_demod_smoothing) {
        dem = smooth_one_period(dem, nper);
        first_index += nper - 1;
        align = nper;
    }

    if (!dem.empty()) {
        EstimatorOptions eopts;
        eopts.saliency = cfg.first_order_saliency ? SaliencyModel::FirstOrder
                                                  : SaliencyModel::Exact;
        eopts.ripple_filter_correction = !cfg.no_ripple_correction;
        eopts.ripple_filter_kappa = inj.waveform.ripple_filter_kappa();

        double hint = trace.records.front().theta_c;
        double smoothed = hint;
        bool smoother_started = false;
        const double dt_sample = 1.0 / trace.sample_rate;

        double sum_err = 0.0;
        std::size_t flags = 0;
        for (size_t k = 0; k < dem.size(); ++k) {
            const size_t src_row = static_cast<size_t>(first_index) + k;
            if (src_row >= trace.records.size()) break;
            const long target = static_cast<long>(src_row) - align;
            if (target < 0) continue;
            const TraceRecord& tr = trace.records[static_cast<size_t>(target)];
            const PositionEstimate e =
                estimate(dem[k], tr.theta_c, inj.u_tilde, inj.omega, p, hint, eopts);
            hint = e.theta_hat;
            double theta_out = e.theta_hat;
            if (cfg.theta_smoother_tau > 0.0) {
                if (!smoother_started) {
                    smoothed = e.theta_hat;
                    smoother_started = true;
                } else {
                    const double gain = dt_sample / (cfg.theta_smoother_tau + dt_sample);
                    smoothed = wrap_pi(smoothed + gain * wrap_pi(e.theta_hat - smoothed));
                }
                theta_out = smoothed;
            }
            auto& row = out.rows[static_cast<size_t>(target)];
            row[11] = dem[k].i_bar.d;
            row[12] = dem[k].i_bar.q;
            row[13] = dem[k].i_tilde.d;
            row[14] = dem[k].i_tilde.q;
            row[15] = theta_out;
            row[16] = e.residual;
            row[17] = e.ambiguity ? 1.0 : 0.0;

            const double err = std::abs(wrap_pi(theta_out - tr.theta));
            const double err_mod = std::min(err, kPi - err);
            summary.max_err_deg = std::max(summary.max_err_deg, deg_from_rad(err));
            summary.max_err_mod_pi_deg =
                std::max(summary.max_err_mod_pi_deg, deg_from_rad(err_mod));
            sum_err += deg_from_rad(err);
            flags += e.ambiguity ? 1 : 0;
            ++summary.estimated;
        }
        if (summary.estimated > 0) {
            summary.mean_err_deg = sum_err / static_cast<double>(summary.estimated);
            summary.ambiguity_rate =
                static_cast<double>(flags) / static_cast<double>(summary.estimated);
        }
    }

    write_csv(out, out_path);
    std::printf("estimate: %zu samples, %zu estimated | max |theta_hat-theta| = %.3f deg el, "
                "mean = %.3f deg el (mod-pi max %.3f), ambiguity rate %.1f%%\n",
                summary.rows, summary.estimated, summary.max_err_deg, summary.mean_err_deg,
                summary.max_err_mod_pi_deg, 100.0 * summary.ambiguity_rate);
    return summary;
}

IdReport cmd_identify(const IdentifyCmdConfig& cfg) {
    const KeyValueFile kv = KeyValueFile::load(cfg.motor_path);
    MotorParams plant = MotorParams::from_config(kv);
    if (cfg.no_saturation) plant = plant.without_saturation();

    InjectionConfig inj;
    inj.omega = kTwoPi * cfg.omega_inj_hz;
    inj.waveform = make_waveform(cfg.waveform);
    const double amp = cfg.u_amp.has_value() ? *cfg.u_amp : kv.get_double_or("id_u_tilde", 15.0);
    inj.u_tilde = {amp, 0.0};  // per-experiment amplitudes set by the sweeps

    IdSweepConfig sweep;
    sweep.u_amp = amp;
    sweep.levels = cfg.levels;
    IdentifyOptions opts;
    opts.refine = !cfg.first_order_only;

    IdSweepData data;
    const IdReport report = identify_full(plant, inj, sweep, opts, &data);

    ensure_dir(cfg.out_dir);
    report.to_config(plant).save(join(cfg.out_dir, "id_report.cfg"));
    report.as_params(plant, !cfg.first_order_only)
        .to_config()
        .save(join(cfg.out_dir, "identified_motor.cfg"));

    // fitted-vs-measured curves, raw measurements vs both parameter sets
    const MotorParams fit_raw = report.as_params(plant, false);
    const MotorParams fit_ref = report.as_params(plant, true);
    const double om = inj.omega;

    CsvTable dcurve;
    dcurve.columns = {"i_bar_d", "G_dd_measured", "G_dd_fit_raw", "G_dd_fit_refined"};
    for (const IdPoint& pt : data.d_points) {
        const double meas = om * pt.i_tilde.d / pt.u_tilde.x;
        const double raw = admittance(pt.i_bar, fit_raw).dd;
        const double ref = admittance_exact(pt.i_bar, fit_ref).dd;
        dcurve.rows.push_back({pt.i_bar.d, meas, raw, ref});
    }
    write_csv(dcurve, join(cfg.out_dir, "id_fit_d_axis.csv"));

    CsvTable ccurve;
    ccurve.columns = {"i_bar_q", "G_dd_measured", "G_dd_fit_raw", "G_dd_fit_refined",
                      "G_dq_measured", "G_dq_fit_raw", "G_dq_fit_refined"};
    for (const IdPoint& pt : data.cross_points) {
        const double meas_dd = om * pt.i_tilde.d / pt.u_tilde.x;
        const double meas_dq = om * pt.i_tilde.q / pt.u_tilde.x;
        const SymMatrix2 raw = admittance(pt.i_bar, fit_raw);
        const SymMatrix2 ref = admittance_exact(pt.i_bar, fit_ref);
        ccurve.rows.push_back({pt.i_bar.q, meas_dd, raw.dd, ref.dd, meas_dq, raw.dq, ref.dq});
    }
    write_csv(ccurve, join(cfg.out_dir, "id_fit_cross.csv"));

    CsvTable qcurve;
    qcurve.columns = {"i_bar_q", "G_dq_measured", "G_dq_fit_raw", "G_dq_fit_refined",
                      "G_qq_measured", "G_qq_fit_raw", "G_qq_fit_refined"};
    for (const IdPoint& pt : data.q_points) {
        const double meas_dq = om * pt.i_tilde.d / pt.u_tilde.y;
        const double meas_qq = om * pt.i_tilde.q / pt.u_tilde.y;
        const SymMatrix2 raw = admittance(pt.i_bar, fit_raw);
        const SymMatrix2 ref = admittance_exact(pt.i_bar, fit_ref);
        qcurve.rows.push_back({pt.i_bar.q, meas_dq, raw.dq, ref.dq, meas_qq, raw.qq, ref.qq});
    }
    write_csv(qcurve, join(cfg.out_dir, "id_fit_q_axis.csv"));

    std::printf("identify: Ld=%.6g H Lq=%.6g H | a30n=%.4g a12n=%.4g a40n=%.4g a22n=%.4g "
                "a04n=%.4g | a12 spread %.2f%%%s\n",
                report.Ld, report.Lq, fit_ref.a30_norm(), fit_ref.a12_norm(), fit_ref.a40_norm(),
                fit_ref.a22_norm(), fit_ref.a04_norm(), 100.0 * report.a12_spread,
                report.a12_warning ? " (WARNING: a12 estimates disagree)" : "");
    return report;
}

AveragingReport cmd_averaging_check(const AveragingCheckConfig& cfg) {
    const KeyValueFile kv = KeyValueFile::load(cfg.motor_path);
    const MotorParams p = MotorParams::from_config(kv);
    const double amp = cfg.u_amp.has_value() ? *cfg.u_amp : kv.get_double_or("u_tilde", 15.0);

    // short load transient at standstill
    ScenarioProfile prof;
    prof.name = "averaging-check";
    const double D = cfg.duration;
    prof.duration = D;
    const double tau = 0.3 * p.rated_torque();
    const double itq = 1.15 * tau / (1.5 * p.n * p.lambda);
    const double ih = 0.25 * p.In;
    prof.omega_c = PiecewiseLinear({0.0}, {0.0});
    prof.tau_load = PiecewiseLinear({0.0, 0.375 * D, 0.375 * D + 1e-9, D}, {0.0, 0.0, tau, tau});
    prof.i_hold = PiecewiseLinear({0.0, 0.25 * D, D}, {0.0, ih, ih});
    prof.i_torque = PiecewiseLinear({0.0, 0.375 * D, 0.375 * D + 1e-9, D}, {0.0, 0.0, itq, itq});

    RunOptions opts;
    opts.sample_rate = cfg.sample_rate;
    opts.internal_dt = cfg.internal_dt;

    const Waveform wf = make_waveform(cfg.waveform);
    const auto run_at = [&](double omega, bool inject) {
        InjectionConfig inj;
        inj.omega = omega;
        inj.waveform = wf;
        inj.u_tilde = inject ? Vec2{amp, 0.0} : Vec2{0.0, 0.0};
        Vec2 phi0{0.0, 0.0};
        if (inject && amp != 0.0) {
            const double F0 = wf.F(0.0);
            phi0 = inj.u_tilde * (F0 / omega);  // start on the averaged orbit
        }
        return run_scenario_states(prof, inj, p, opts, phi0);
    };

    const double om1 = kTwoPi * cfg.omega_inj_hz;
    const StateTrace slow = run_at(om1, false);
    const StateTrace base = run_at(om1, true);
    const StateTrace dbl = run_at(2.0 * om1, true);

    AveragingReport rep;
    const size_t n = slow.t.size();
    const size_t tail = static_cast<size_t>(0.75 * static_cast<double>(n));
    double resid1 = 0.0, resid2 = 0.0, amp_meas = 0.0;
    for (size_t k = 0; k < n; ++k) {
        rep.theta_dev_base = std::max(rep.theta_dev_base, std::abs(base.theta[k] - slow.theta[k]));
        rep.theta_dev_double = std::max(rep.theta_dev_double, std::abs(dbl.theta[k] - slow.theta[k]));
        if (k >= tail) {
            const Vec2 rip1 = base.phi_gd[k] - slow.phi_gd[k];
            const Vec2 rip2 = dbl.phi_gd[k] - slow.phi_gd[k];
            amp_meas = std::max(amp_meas, rip1.norm());
            const double F1 = wf.F(om1 * base.t[k]);
            const double F2 = wf.F(2.0 * om1 * dbl.t[k]);
            const Vec2 model1 = Vec2{amp, 0.0} * (F1 / om1);
            const Vec2 model2 = Vec2{amp, 0.0} * (F2 / (2.0 * om1));
            resid1 = std::max(resid1, (rip1 - model1).norm());
            resid2 = std::max(resid2, (rip2 - model2).norm());
        }
    }
    rep.ripple_amp = amp_meas;
    rep.ripple_amp_model = amp / om1 * wf.max_F();
    rep.ripple_rel_err = rep.ripple_amp_model > 0.0
                             ? std::abs(rep.ripple_amp - rep.ripple_amp_model) / rep.ripple_amp_model
                             : 0.0;
    rep.model_resid_base = resid1;
    rep.model_resid_double = resid2;
    rep.theta_dev_ratio = rep.theta_dev_double > 0.0 ? rep.theta_dev_base / rep.theta_dev_double
                                                     : 0.0;
    rep.model_resid_ratio = resid2 > 0.0 ? resid1 / resid2 : 0.0;

    ensure_dir(cfg.out_dir);
    KeyValueFile out;
    out.set("theta_dev_base", rep.theta_dev_base);
    out.set("theta_dev_double", rep.theta_dev_double);
    out.set("theta_dev_ratio", rep.theta_dev_ratio);
    out.set("ripple_amp", rep.ripple_amp);
    out.set("ripple_amp_model", rep.ripple_amp_model);
    out.set("ripple_rel_err", rep.ripple_rel_err);
    out.set("model_resid_base", rep.model_resid_base);
    out.set("model_resid_double", rep.model_resid_double);
    out.set("model_resid_ratio", rep.model_resid_ratio);
    out.save(join(cfg.out_dir, "averaging_check.cfg"));

    std::printf("averaging-check: theta-deviation %.3e / %.3e rad, ratio %.2f | flux ripple "
                "%.6e vs model %.6e (%.2f%%) | model residual ratio %.2f\n",
                rep.theta_dev_base, rep.theta_dev_double, rep.theta_dev_ratio, rep.ripple_amp,
                rep.ripple_amp_model, 100.0 * rep.ripple_rel_err, rep.model_resid_ratio);
    return rep;
}

}  // namespace pmsm
