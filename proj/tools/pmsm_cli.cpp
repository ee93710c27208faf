// Command-line front end: simulate / estimate / identify / averaging-check.
// Exit codes: 0 success, 1 usage or configuration error, 2 numerical failure.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "pmsm/errors.hpp"
#include "pmsm/harness.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"Saturated-PMSM simulation, signal-injection position estimation and "
                 "locked-rotor magnetic identification"};
    app.require_subcommand(1);

    // simulate
    pmsm::RunConfig sim;
    double sim_utilde = 0.0;
    auto* c_sim = app.add_subcommand("simulate", "run a scenario and write trace.csv");
    c_sim->add_option("--motor", sim.motor_path, "motor config file")->required();
    c_sim->add_option("--scenario", sim.scenario, "built-in name or profile file");
    c_sim->add_option("--omega-inj", sim.omega_inj_hz, "injection frequency [Hz]");
    auto* o_amp = c_sim->add_option("--u-tilde", sim_utilde, "injection amplitude [V]");
    c_sim->add_option("--waveform", sim.waveform, "square | sine | table.csv");
    c_sim->add_flag("--no-saturation", sim.no_saturation, "zero the plant saturation");
    c_sim->add_option("--noise-std", sim.noise_std, "current measurement noise [A]");
    c_sim->add_option("--seed", sim.seed, "noise seed");
    c_sim->add_option("--out", sim.out_dir, "output directory");
    c_sim->add_option("--time-scale", sim.time_scale, "profile time compression factor");
    c_sim->add_option("--sample-rate", sim.sample_rate, "measurement rate [Hz]");

    // estimate
    pmsm::EstimateConfig est;
    double est_utilde = 0.0;
    auto* c_est = app.add_subcommand("estimate", "demodulate a trace and estimate the angle");
    c_est->add_option("--trace", est.trace_path, "trace CSV from simulate")->required();
    c_est->add_option("--motor", est.motor_path, "estimator model config")->required();
    c_est->add_option("--omega-inj", est.omega_inj_hz, "injection frequency [Hz]");
    auto* o_amp_e = c_est->add_option("--u-tilde", est_utilde, "commanded amplitude [V]");
    c_est->add_option("--waveform", est.waveform, "square | sine | table.csv");
    c_est->add_flag("--no-saturation", est.no_saturation, "zero the estimator saturation");
    c_est->add_flag("--first-order-saliency", est.first_order_saliency,
                    "closed-form first-order saliency instead of exact inversion");
    c_est->add_flag("--no-ripple-correction", est.no_ripple_correction,
                    "skip the (R G / Omega)^2 model correction");
    c_est->add_flag("--no-demod-smoothing", est.no_demod_smoothing,
                    "skip the one-period smoothing of demodulated outputs");
    c_est->add_option("--theta-smoother-tau", est.theta_smoother_tau,
                      "optional first-order smoother on theta_hat [s]");
    c_est->add_option("--out", est.out_dir, "output directory");

    // identify
    pmsm::IdentifyCmdConfig ident;
    double id_amp = 0.0;
    auto* c_id = app.add_subcommand("identify", "locked-rotor magnetic identification");
    c_id->add_option("--motor", ident.motor_path, "plant config file")->required();
    c_id->add_option("--omega-inj", ident.omega_inj_hz, "injection frequency [Hz]");
    auto* o_amp_i = c_id->add_option("--u-tilde", id_amp, "HF amplitude [V]");
    c_id->add_option("--waveform", ident.waveform, "square | sine | table.csv");
    c_id->add_flag("--no-saturation", ident.no_saturation, "identify the linearized plant");
    c_id->add_flag("--first-order-only", ident.first_order_only,
                   "skip the self-consistent refinement");
    c_id->add_option("--levels", ident.levels, "DC sweep levels per family");
    c_id->add_option("--out", ident.out_dir, "output directory");

    // averaging-check
    pmsm::AveragingCheckConfig avg;
    double avg_amp = 0.0;
    auto* c_avg = app.add_subcommand("averaging-check",
                                     "injection-effect scaling report (Omega vs 2 Omega)");
    c_avg->add_option("--motor", avg.motor_path, "motor config file")->required();
    c_avg->add_option("--omega-inj", avg.omega_inj_hz, "injection frequency [Hz]");
    auto* o_amp_a = c_avg->add_option("--u-tilde", avg_amp, "injection amplitude [V]");
    c_avg->add_option("--waveform", avg.waveform, "square | sine | table.csv");
    c_avg->add_option("--duration", avg.duration, "check duration [s]");
    c_avg->add_option("--out", avg.out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    if (c_sim->parsed()) {
        if (o_amp->count() > 0) sim.u_tilde = sim_utilde;
        const std::string path = pmsm::cmd_simulate(sim);
        std::printf("simulate: wrote %s\n", path.c_str());
        return 0;
    }
    if (c_est->parsed()) {
        if (o_amp_e->count() > 0) est.u_tilde = est_utilde;
        pmsm::cmd_estimate(est);
        return 0;
    }
    if (c_id->parsed()) {
        if (o_amp_i->count() > 0) ident.u_amp = id_amp;
        pmsm::cmd_identify(ident);
        return 0;
    }
    if (c_avg->parsed()) {
        if (o_amp_a->count() > 0) avg.u_amp = avg_amp;
        pmsm::cmd_averaging_check(avg);
        return 0;
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const pmsm::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const pmsm::ValidityError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const pmsm::ConvergenceError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
