#include "pmsm/identification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "pmsm/demodulation.hpp"
#include "pmsm/errors.hpp"
#include "pmsm/least_squares.hpp"
#include "pmsm/simulation.hpp"

namespace pmsm {

namespace {

std::string fmt_levels(const std::vector<double>& v) {
    std::string s = "{";
    for (size_t k = 0; k < v.size(); ++k) {
        char buf[24];
        std::snprintf(buf, sizeof(buf), "%.4g%s", v[k], k + 1 < v.size() ? ", " : "");
        s += buf;
    }
    return s + "}";
}

}  // namespace

IdPoint run_id_experiment(const Vec2& u_bar, const Vec2& u_tilde, const InjectionConfig& cfg,
                          const MotorParams& plant, const IdExperimentOptions& opts) {
    InjectionConfig inj = cfg;
    inj.u_tilde = u_tilde;
    inj.validate();
    const double Tp = inj.period();
    double dt = opts.internal_dt > 0.0 ? opts.internal_dt : Tp / 40.0;
    const double nsamp_f = 1.0 / (opts.sample_rate * dt);
    const long nsamp = std::lround(nsamp_f);
    if (nsamp < 1 || std::abs(nsamp_f - static_cast<double>(nsamp)) > 1e-9)
        throw ConfigError("run_id_experiment: internal dt must divide the sampling period");
    if (inj.waveform.piecewise_constant()) {
        const double half_steps = Tp / 2.0 / dt;
        if (std::abs(half_steps - std::round(half_steps)) > 1e-9)
            throw ConfigError("run_id_experiment: internal dt must divide the half period");
    }

    double settle = opts.settle > 0.0 ? opts.settle
                                      : 10.0 * std::max(plant.Ld, plant.Lq) / plant.R;
    settle = std::ceil(settle / Tp) * Tp;
    const int meas_periods = std::max(opts.measure_periods, 7);
    const double duration = settle + meas_periods * Tp;
    const long nsteps = std::lround(duration / dt);
    const long settle_steps = std::lround(settle / dt);

    FluxDQ phi;
    std::vector<double> ts;
    std::vector<Vec2> is;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (k >= settle_steps && (k - settle_steps) % nsamp == 0) {
            const CurrentDQ i = current_from_flux(phi, plant);
            ts.push_back(t);
            is.push_back(i.vec());
        }
        if (k == nsteps) break;
        // input held over the step, sampled at the step midpoint (exact for
        // the square wave with aligned steps)
        const Vec2 u = injected_voltage(t + 0.5 * dt, u_bar, inj);
        phi = locked_rotor_step(phi, u, plant, dt);
    }

    const std::vector<DemodulatedCurrents> dem = demodulate(ts, is, inj);
    if (dem.empty())
        throw ConfigError("run_id_experiment: measurement window shorter than one period");

    // steady-state gate: slow-current change per period over the last five
    const long per_samples = std::lround(opts.sample_rate * Tp);
    const long need = 5 * per_samples + 1;
    if (static_cast<long>(dem.size()) < need)
        throw ConfigError("run_id_experiment: need at least six measured periods");
    const DemodulatedCurrents& last = dem.back();
    const double scale = std::max({last.i_bar.vec().norm(), 0.01 * last.i_tilde.vec().norm(),
                                   1e-9});
    for (int per = 0; per < 5; ++per) {
        const size_t a = dem.size() - 1 - static_cast<size_t>(per * per_samples);
        const size_t b = a - static_cast<size_t>(per_samples);
        const double change = (dem[a].i_bar.vec() - dem[b].i_bar.vec()).norm();
        if (change > opts.steady_tol * scale) {
            char buf[160];
            std::snprintf(buf, sizeof(buf),
                          "run_id_experiment: slow current not settled at u_bar=(%.4g, %.4g) V "
                          "(change %.3g of scale %.3g); increase the settle time",
                          u_bar.x, u_bar.y, change, scale);
            throw ConvergenceError(buf);
        }
    }

    IdPoint pt;
    pt.u_bar = u_bar;
    pt.u_tilde = u_tilde;
    pt.i_bar = last.i_bar;
    pt.i_tilde = last.i_tilde;
    return pt;
}

LdLqEstimate estimate_Ld_Lq(const std::vector<IdPoint>& points, double omega_inj) {
    LdLqEstimate out;
    double acc_d = 0.0, acc_q = 0.0;
    for (const IdPoint& pt : points) {
        if (pt.u_bar.norm() != 0.0) continue;
        const bool d_only = pt.u_tilde.x != 0.0 && pt.u_tilde.y == 0.0;
        const bool q_only = pt.u_tilde.y != 0.0 && pt.u_tilde.x == 0.0;
        if (d_only) {
            if (std::abs(pt.i_tilde.d) < 1e-12)
                throw ConvergenceError("estimate_Ld_Lq: vanishing d-axis ripple");
            acc_d += pt.u_tilde.x / (omega_inj * pt.i_tilde.d);
            ++out.points_d;
        } else if (q_only) {
            if (std::abs(pt.i_tilde.q) < 1e-12)
                throw ConvergenceError("estimate_Ld_Lq: vanishing q-axis ripple");
            acc_q += pt.u_tilde.y / (omega_inj * pt.i_tilde.q);
            ++out.points_q;
        }
    }
    if (out.points_d == 0 || out.points_q == 0)
        throw ConvergenceError("estimate_Ld_Lq: need at least one d-excited and one q-excited "
                               "point with u_bar = 0");
    out.Ld = acc_d / out.points_d;
    out.Lq = acc_q / out.points_q;
    return out;
}

FitResult fit_d_axis(const std::vector<IdPoint>& points, double Ld, double omega_inj) {
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    std::vector<double> levels;
    bool pos = false, neg = false;
    for (const IdPoint& pt : points) {
        if (pt.u_tilde.x == 0.0 || pt.u_tilde.y != 0.0) continue;
        const double id = pt.i_bar.d;
        A.push_back({6.0 * Ld * id, 12.0 * Ld * Ld * id * id});
        b.push_back(omega_inj * pt.i_tilde.d / pt.u_tilde.x - 1.0 / Ld);
        levels.push_back(id);
        pos = pos || id > 0.0;
        neg = neg || id < 0.0;
    }
    std::set<double> distinct(levels.begin(), levels.end());
    if (distinct.size() < 3 || !pos || !neg)
        throw ConvergenceError("fit_d_axis: need >= 3 distinct i_bar_d levels spanning both "
                               "signs, got " + fmt_levels(levels));
    const LeastSquaresResult ls = solve_qr(A, b);
    FitResult out;
    out.value_a = ls.x[0];
    out.value_b = ls.x[1];
    out.residual = ls.residual_norm;
    out.points = static_cast<int>(b.size());
    return out;
}

FitResult fit_cross_terms(const std::vector<IdPoint>& points, double Ld, double Lq,
                          double omega_inj, const KnownCoefficients& known) {
    std::vector<std::vector<double>> A22;
    std::vector<double> b22;
    std::vector<double> mags;
    for (const IdPoint& pt : points) {
        if (pt.u_tilde.x == 0.0 || pt.u_tilde.y != 0.0) continue;
        const double id = pt.i_bar.d, iq = pt.i_bar.q;
        A22.push_back({2.0 * Lq * Lq * iq * iq});
        b22.push_back(omega_inj * pt.i_tilde.d / pt.u_tilde.x - 1.0 / Ld
                      - 6.0 * known.a30 * Ld * id - 12.0 * known.a40 * Ld * Ld * id * id);
        mags.push_back(std::abs(iq));
    }
    std::set<double> distinct(mags.begin(), mags.end());
    distinct.erase(0.0);
    if (distinct.size() < 2)
        throw ConvergenceError("fit_cross_terms: need >= 2 distinct |i_bar_q| magnitudes, got " +
                               fmt_levels(mags));
    const LeastSquaresResult ls22 = solve_qr(A22, b22);
    const double a22 = ls22.x[0];

    std::vector<std::vector<double>> A12;
    std::vector<double> b12;
    for (const IdPoint& pt : points) {
        if (pt.u_tilde.x == 0.0 || pt.u_tilde.y != 0.0) continue;
        const double id = pt.i_bar.d, iq = pt.i_bar.q;
        A12.push_back({2.0 * Lq * iq});
        b12.push_back(omega_inj * pt.i_tilde.q / pt.u_tilde.x - 4.0 * a22 * Ld * id * Lq * iq);
    }
    const LeastSquaresResult ls12 = solve_qr(A12, b12);

    FitResult out;
    out.value_a = a22;
    out.value_b = ls12.x[0];
    out.residual = std::hypot(ls22.residual_norm, ls12.residual_norm);
    out.points = static_cast<int>(b22.size());
    return out;
}

FitResult fit_q_axis(const std::vector<IdPoint>& points, double Ld, double Lq,
                     double omega_inj, const KnownCoefficients& known) {
    std::vector<std::vector<double>> A12;
    std::vector<double> b12;
    std::vector<double> mags;
    for (const IdPoint& pt : points) {
        if (pt.u_tilde.y == 0.0 || pt.u_tilde.x != 0.0) continue;
        const double id = pt.i_bar.d, iq = pt.i_bar.q;
        A12.push_back({2.0 * Lq * iq});
        b12.push_back(omega_inj * pt.i_tilde.d / pt.u_tilde.y - 4.0 * known.a22 * Ld * id * Lq * iq);
        mags.push_back(std::abs(iq));
    }
    std::set<double> distinct(mags.begin(), mags.end());
    distinct.erase(0.0);
    if (distinct.size() < 2)
        throw ConvergenceError("fit_q_axis: need >= 2 distinct |i_bar_q| magnitudes, got " +
                               fmt_levels(mags));
    const LeastSquaresResult ls12 = solve_qr(A12, b12);
    const double a12 = ls12.x[0];

    std::vector<std::vector<double>> A04;
    std::vector<double> b04;
    for (const IdPoint& pt : points) {
        if (pt.u_tilde.y == 0.0 || pt.u_tilde.x != 0.0) continue;
        const double id = pt.i_bar.d, iq = pt.i_bar.q;
        A04.push_back({12.0 * Lq * Lq * iq * iq});
        b04.push_back(omega_inj * pt.i_tilde.q / pt.u_tilde.y - 1.0 / Lq
                      - 2.0 * a12 * Ld * id - 2.0 * known.a22 * Ld * Ld * id * id);
    }
    const LeastSquaresResult ls04 = solve_qr(A04, b04);

    FitResult out;
    out.value_a = a12;
    out.value_b = ls04.x[0];
    out.residual = std::hypot(ls12.residual_norm, ls04.residual_norm);
    out.points = static_cast<int>(b12.size());
    return out;
}

IdSweepData run_id_sweeps(const MotorParams& plant, const InjectionConfig& base_cfg,
                          const IdSweepConfig& sweep) {
    const double amp = sweep.u_amp;
    const double imax = sweep.max_current > 0.0 ? sweep.max_current : 2.0 * plant.In;
    if (sweep.levels < 3) throw ConfigError("identification sweep needs >= 3 levels");

    IdSweepData data;
    data.l_points.push_back(run_id_experiment({0, 0}, {amp, 0}, base_cfg, plant, sweep.experiment));
    data.l_points.push_back(run_id_experiment({0, 0}, {0, amp}, base_cfg, plant, sweep.experiment));
    for (int k = 0; k < sweep.levels; ++k) {
        const double lev = -imax + 2.0 * imax * k / (sweep.levels - 1);
        const Vec2 ub_d{plant.R * lev, 0.0};
        const Vec2 ub_q{0.0, plant.R * lev};
        data.d_points.push_back(run_id_experiment(ub_d, {amp, 0}, base_cfg, plant, sweep.experiment));
        data.cross_points.push_back(
            run_id_experiment(ub_q, {amp, 0}, base_cfg, plant, sweep.experiment));
        data.q_points.push_back(run_id_experiment(ub_q, {0, amp}, base_cfg, plant, sweep.experiment));
    }
    return data;
}

namespace {

struct ParamSet {
    double Ld = 0.0, Lq = 0.0, a30 = 0.0, a12 = 0.0, a40 = 0.0, a22 = 0.0, a04 = 0.0;
};

MotorParams to_motor(const ParamSet& s, const MotorParams& ref) {
    MotorParams p = ref;
    p.Ld = s.Ld;
    p.Lq = s.Lq;
    p.a30 = s.a30;
    p.a12 = s.a12;
    p.a40 = s.a40;
    p.a22 = s.a22;
    p.a04 = s.a04;
    return p;
}

/// Measurement corrections + flux-equivalent currents for the refinement
/// pass: deconvolve the (R G / Omega)^2 ripple filtering, subtract the
/// F^2-rectification from the slow current, then replace the current by
/// phi_hat ./ (Ld, Lq) so the first-order regressors evaluate the exact
/// Hessian entries.
IdPoint refine_point(const IdPoint& raw, const MotorParams& est, double omega_inj,
                     double kappa, double mean_F2) {
    const FluxDQ phi0 = flux_from_current_exact(raw.i_bar, est);
    const SymMatrix2 g = hessian_at_flux(phi0, est);
    const double scale = kappa * (est.R / omega_inj) * (est.R / omega_inj);
    const Mat22 g2 = g.full() * g.full();
    Vec2 itl = raw.i_tilde.vec();
    itl = itl + scale * (g2 * itl);

    const Vec2 v{raw.u_tilde.x / omega_inj, raw.u_tilde.y / omega_inj};
    const EnergyThirdDerivatives t3 = energy_third_derivatives(phi0, est);
    const Vec2 rect{0.5 * mean_F2 * (t3.ddd * v.x * v.x + 2.0 * t3.ddq * v.x * v.y +
                                     t3.dqq * v.y * v.y),
                    0.5 * mean_F2 * (t3.ddq * v.x * v.x + 2.0 * t3.dqq * v.x * v.y +
                                     t3.qqq * v.y * v.y)};
    const CurrentDQ ib_corr{raw.i_bar.d - rect.x, raw.i_bar.q - rect.y};
    const FluxDQ phi = flux_from_current_exact(ib_corr, est);

    IdPoint out = raw;
    out.i_bar = {phi.d / est.Ld, phi.q / est.Lq};
    out.i_tilde = {itl.x, itl.y};
    return out;
}

ParamSet fit_pass(const IdSweepData& data, double omega_inj, IdReport& report) {
    ParamSet s;
    const LdLqEstimate ll = estimate_Ld_Lq(data.l_points, omega_inj);
    s.Ld = ll.Ld;
    s.Lq = ll.Lq;
    const FitResult fd = fit_d_axis(data.d_points, s.Ld, omega_inj);
    s.a30 = fd.value_a;
    s.a40 = fd.value_b;
    KnownCoefficients known;
    known.a30 = s.a30;
    known.a40 = s.a40;
    const FitResult fc = fit_cross_terms(data.cross_points, s.Ld, s.Lq, omega_inj, known);
    s.a22 = fc.value_a;
    known.a22 = s.a22;
    const FitResult fq = fit_q_axis(data.q_points, s.Ld, s.Lq, omega_inj, known);
    s.a04 = fq.value_b;
    report.a12_from_cross = fc.value_b;
    report.a12_from_q = fq.value_a;
    s.a12 = 0.5 * (fc.value_b + fq.value_a);
    report.resid_d = fd.residual;
    report.resid_cross = fc.residual;
    report.resid_q = fq.residual;
    return s;
}

double rel_change(const ParamSet& a, const ParamSet& b) {
    const auto rc = [](double x, double y) {
        const double s = std::max({std::abs(x), std::abs(y), 1e-12});
        return std::abs(x - y) / s;
    };
    return std::max({rc(a.Ld, b.Ld), rc(a.Lq, b.Lq), rc(a.a30, b.a30), rc(a.a12, b.a12),
                     rc(a.a40, b.a40), rc(a.a22, b.a22), rc(a.a04, b.a04)});
}

}  // namespace

IdReport fit_sweep_data(const IdSweepData& data, const InjectionConfig& base_cfg,
                        const MotorParams& plant_ref, const IdentifyOptions& opts) {
    IdReport report;
    report.points_total = static_cast<int>(data.l_points.size() + data.d_points.size() +
                                           data.cross_points.size() + data.q_points.size());
    const double om = base_cfg.omega;

    ParamSet raw = fit_pass(data, om, report);
    report.raw_Ld = raw.Ld;
    report.raw_Lq = raw.Lq;
    report.raw_a30 = raw.a30;
    report.raw_a12 = raw.a12;
    report.raw_a40 = raw.a40;
    report.raw_a22 = raw.a22;
    report.raw_a04 = raw.a04;

    ParamSet cur = raw;
    if (opts.refine) {
        const double kappa = base_cfg.waveform.ripple_filter_kappa();
        const double mean_F2 = base_cfg.waveform.mean_F_squared();
        for (int it = 0; it < opts.max_refine_iterations; ++it) {
            const MotorParams est = to_motor(cur, plant_ref);
            IdSweepData corr;
            const auto fix = [&](const std::vector<IdPoint>& pts) {
                std::vector<IdPoint> out;
                out.reserve(pts.size());
                for (const IdPoint& pt : pts)
                    out.push_back(refine_point(pt, est, om, kappa, mean_F2));
                return out;
            };
            corr.l_points = fix(data.l_points);
            corr.d_points = fix(data.d_points);
            corr.cross_points = fix(data.cross_points);
            corr.q_points = fix(data.q_points);
            const ParamSet next = fit_pass(corr, om, report);
            report.refine_iterations = it + 1;
            const double change = rel_change(cur, next);
            cur = next;
            if (change < opts.refine_tol) break;
        }
    }

    report.Ld = cur.Ld;
    report.Lq = cur.Lq;
    report.a30 = cur.a30;
    report.a12 = cur.a12;
    report.a40 = cur.a40;
    report.a22 = cur.a22;
    report.a04 = cur.a04;
    const double denom = std::max(std::abs(report.a12), 1e-12);
    report.a12_spread = std::abs(report.a12_from_cross - report.a12_from_q) / denom;
    report.a12_warning = report.a12_spread > opts.a12_spread_warning;
    return report;
}

IdReport identify_full(const MotorParams& plant, const InjectionConfig& base_cfg,
                       const IdSweepConfig& sweep, const IdentifyOptions& opts,
                       IdSweepData* data_out) {
    const IdSweepData data = run_id_sweeps(plant, base_cfg, sweep);
    if (data_out) *data_out = data;
    return fit_sweep_data(data, base_cfg, plant, opts);
}

MotorParams IdReport::as_params(const MotorParams& plant, bool refined) const {
    MotorParams p = plant;
    if (refined) {
        p.Ld = Ld;
        p.Lq = Lq;
        p.a30 = a30;
        p.a12 = a12;
        p.a40 = a40;
        p.a22 = a22;
        p.a04 = a04;
    } else {
        p.Ld = raw_Ld;
        p.Lq = raw_Lq;
        p.a30 = raw_a30;
        p.a12 = raw_a12;
        p.a40 = raw_a40;
        p.a22 = raw_a22;
        p.a04 = raw_a04;
    }
    return p;
}

KeyValueFile IdReport::to_config(const MotorParams& plant) const {
    KeyValueFile kv;
    const MotorParams fit = as_params(plant, true);
    kv.set("Ld", Ld);
    kv.set("Lq", Lq);
    kv.set("a30", a30);
    kv.set("a12", a12);
    kv.set("a40", a40);
    kv.set("a22", a22);
    kv.set("a04", a04);
    kv.set("a30_norm", fit.a30_norm());
    kv.set("a12_norm", fit.a12_norm());
    kv.set("a40_norm", fit.a40_norm());
    kv.set("a22_norm", fit.a22_norm());
    kv.set("a04_norm", fit.a04_norm());
    kv.set("a12_from_cross", a12_from_cross);
    kv.set("a12_from_q", a12_from_q);
    kv.set("a12_spread", a12_spread);
    kv.set("a12_warning", a12_warning ? 1.0 : 0.0);
    kv.set("resid_d", resid_d);
    kv.set("resid_cross", resid_cross);
    kv.set("resid_q", resid_q);
    kv.set("points_total", static_cast<double>(points_total));
    kv.set("refine_iterations", static_cast<double>(refine_iterations));
    const MotorParams rawp = as_params(plant, false);
    kv.set("raw_Ld", raw_Ld);
    kv.set("raw_Lq", raw_Lq);
    kv.set("raw_a30_norm", rawp.a30_norm());
    kv.set("raw_a12_norm", rawp.a12_norm());
    kv.set("raw_a40_norm", rawp.a40_norm());
    kv.set("raw_a22_norm", rawp.a22_norm());
    kv.set("raw_a04_norm", rawp.a04_norm());
    return kv;
}

}  // namespace pmsm
