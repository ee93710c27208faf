#include "pmsm/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "pmsm/errors.hpp"

namespace pmsm {

PiecewiseLinear::PiecewiseLinear(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size() || times_.empty())
        throw ConfigError("piecewise profile: times/values size mismatch or empty");
    for (size_t k = 1; k < times_.size(); ++k)
        if (!(times_[k] >= times_[k - 1]))
            throw ConfigError("piecewise profile: breakpoints must be non-decreasing");
}

double PiecewiseLinear::operator()(double t) const {
    if (times_.empty()) return 0.0;
    if (t <= times_.front()) return values_.front();
    if (t >= times_.back()) return values_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const size_t hi = static_cast<size_t>(it - times_.begin());
    const size_t lo = hi - 1;
    const double span = times_[hi] - times_[lo];
    if (span <= 0.0) return values_[hi];
    const double w = (t - times_[lo]) / span;
    return values_[lo] * (1.0 - w) + values_[hi] * w;
}

PiecewiseLinear PiecewiseLinear::parse(const std::string& text) {
    std::vector<double> ts, vs;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ConfigError("piecewise profile: expected 't:v', got '" + item + "'");
        try {
            ts.push_back(std::stod(item.substr(0, colon)));
            vs.push_back(std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ConfigError("piecewise profile: bad number in '" + item + "'");
        }
    }
    return PiecewiseLinear(std::move(ts), std::move(vs));
}

namespace {

constexpr double kHoldCurrentFraction = 0.25;  // gamma-axis holding current / In

double torque_current(const MotorParams& p, double tau, double margin) {
    return margin * tau / (1.5 * p.n * p.lambda);
}

ScenarioProfile make_rest(const MotorParams&, double scale) {
    ScenarioProfile s;
    s.name = "rest";
    s.duration = 1.0 * scale;
    s.omega_c = PiecewiseLinear({0.0}, {0.0});
    s.tau_load = PiecewiseLinear({0.0}, {0.0});
    s.i_hold = PiecewiseLinear({0.0}, {0.0});
    s.i_torque = PiecewiseLinear({0.0}, {0.0});
    return s;
}

ScenarioProfile make_speed_reversal(const MotorParams& p, double scale) {
    if (!(p.omega_rated > 0.0))
        throw ConfigError("speed-reversal scenario requires omega_rated in the motor config");
    ScenarioProfile s;
    s.name = "speed-reversal";
    const double D = 20.0 * scale;
    s.duration = D;
    const double w0 = 0.002 * p.omega_rated;
    const double tau = 1.5 * p.rated_torque();
    const double itq = torque_current(p, tau, 1.15);
    const double ih = kHoldCurrentFraction * p.In;
    s.omega_c = PiecewiseLinear({0.0, 0.3 * D, 0.7 * D, D}, {-w0, -w0, w0, w0});
    s.tau_load = PiecewiseLinear({0.0, 0.125 * D, D}, {0.0, tau, tau});
    s.i_hold = PiecewiseLinear({0.0, 0.125 * D, D}, {0.0, ih, ih});
    s.i_torque = PiecewiseLinear({0.0, 0.125 * D, D}, {0.0, itq, itq});
    return s;
}

ScenarioProfile make_load_step(const MotorParams& p, double scale) {
    ScenarioProfile s;
    s.name = "load-step";
    const double D = 10.0 * scale;
    s.duration = D;
    const double tau = p.rated_torque();
    const double itq = torque_current(p, tau, 1.15);
    const double ih = kHoldCurrentFraction * p.In;
    const double t0 = 0.4 * D;
    s.omega_c = PiecewiseLinear({0.0}, {0.0});
    s.tau_load = PiecewiseLinear({0.0, t0, t0 + 1e-9, D}, {0.0, 0.0, tau, tau});
    s.i_hold = PiecewiseLinear({0.0, 0.1 * D, D}, {0.0, ih, ih});
    s.i_torque = PiecewiseLinear({0.0, t0, t0 + 1e-9, D}, {0.0, 0.0, itq, itq});
    return s;
}

ScenarioProfile make_long_test(const MotorParams& p, double scale) {
    if (!(p.omega_rated > 0.0))
        throw ConfigError("long-test scenario requires omega_rated in the motor config");
    ScenarioProfile s;
    s.name = "long-test";
    const double D = 210.0 * scale;
    s.duration = D;
    const double wR = p.omega_rated;
    const double tauR = p.rated_torque();
    const double km = 1.05;
    const double ih = kHoldCurrentFraction * p.In;

    // speed between +-5% of rated, torque between 0 and 180% of rated
    const std::vector<double> tf = {0.0, 0.05, 0.15, 0.30, 0.40, 0.45, 0.60, 0.75, 0.90, 1.0};
    const std::vector<double> wfrac = {0.0, 0.0, 0.05, 0.05, -0.05, -0.05, -0.05, 0.02, 0.0, 0.0};
    const std::vector<double> taufrac = {0.0, 0.3, 0.3, 0.9, 1.8, 1.8, 0.6, 1.2, 1.8, 0.0};

    std::vector<double> ts, ws, taus, itqs, ihs;
    for (size_t k = 0; k < tf.size(); ++k) {
        ts.push_back(tf[k] * D);
        ws.push_back(wfrac[k] * wR);
        taus.push_back(taufrac[k] * tauR);
        itqs.push_back(torque_current(p, taufrac[k] * tauR, km));
        ihs.push_back(k == 0 ? 0.0 : ih);
    }
    s.omega_c = PiecewiseLinear(ts, ws);
    s.tau_load = PiecewiseLinear(ts, taus);
    s.i_hold = PiecewiseLinear(ts, ihs);
    s.i_torque = PiecewiseLinear(ts, itqs);
    return s;
}

}  // namespace

ScenarioProfile built_in_scenario(const std::string& name, const MotorParams& p,
                                  double time_scale) {
    const auto pick_scale = [&](double fallback) {
        return time_scale > 0.0 ? time_scale : fallback;
    };
    if (name == "rest") return make_rest(p, pick_scale(1.0));
    if (name == "speed-reversal") return make_speed_reversal(p, pick_scale(0.4));
    if (name == "load-step") return make_load_step(p, pick_scale(0.6));
    if (name == "long-test") return make_long_test(p, pick_scale(0.1));
    throw ConfigError("unknown scenario '" + name + "'; built-ins: rest, speed-reversal, "
                      "load-step, long-test");
}

std::vector<std::string> built_in_scenario_names() {
    return {"rest", "speed-reversal", "load-step", "long-test"};
}

ScenarioProfile scenario_from_config(const KeyValueFile& kv) {
    ScenarioProfile s;
    s.name = kv.maybe("name").value_or("custom");
    s.duration = kv.get_double("duration");
    s.filter_tau = kv.get_double_or("filter_tau", 0.05);
    s.omega_c = PiecewiseLinear::parse(kv.get_string("omega_c"));
    s.tau_load = PiecewiseLinear::parse(kv.get_string("tau_load"));
    s.i_hold = PiecewiseLinear::parse(kv.get_string("i_hold"));
    s.i_torque = PiecewiseLinear::parse(kv.get_string("i_torque"));
    return s;
}

namespace {

/// Full open-loop system state: gamma-delta flux, mechanics, controller angle,
/// filtered resistive compensation and filtered load torque.
struct SysState {
    double pg = 0.0, pd = 0.0;    // phi_gamma, phi_delta [Wb]
    double w = 0.0, th = 0.0;     // electrical speed / angle
    double thc = 0.0;             // controller angle
    double urg = 0.0, urd = 0.0;  // filtered resistive compensation [V]
    double tau = 0.0;             // filtered load torque [N m]
};

struct SysDeriv {
    double pg, pd, w, th, thc, urg, urd, tau;
};

SysDeriv sys_rhs(double t, const SysState& y, const Vec2& u_inj, const ScenarioProfile& prof,
                 const MotorParams& p) {
    const double wc = prof.omega_c(t);
    const double psi = y.th - y.thc;
    const double c = std::cos(psi), s = std::sin(psi);
    // dq flux and current
    const FluxDQ phi_dq{c * y.pg + s * y.pd, -s * y.pg + c * y.pd};
    const CurrentDQ i_dq = current_from_flux(phi_dq, p);
    const double ig = c * i_dq.d - s * i_dq.q;
    const double id = s * i_dq.d + c * i_dq.q;

    const double ug = y.urg + u_inj.x;
    const double ud = y.urd + wc * p.lambda + u_inj.y;

    const double mg = p.lambda * c;  // magnet flux in gamma-delta frame
    const double md = p.lambda * s;

    SysDeriv d;
    d.pg = ug - p.R * ig + wc * y.pd + y.w * md;
    d.pd = ud - p.R * id - wc * y.pg - y.w * mg;
    const double torque_term = 1.5 * (ig * (-(y.pd + md)) + id * (y.pg + mg));
    d.w = (static_cast<double>(p.n) * p.n / p.J) * (torque_term - y.tau / p.n);
    d.th = y.w;
    d.thc = wc;
    d.urg = (p.R * prof.i_hold(t) - y.urg) / prof.filter_tau;
    d.urd = (p.R * prof.i_torque(t) - y.urd) / prof.filter_tau;
    d.tau = (prof.tau_load(t) - y.tau) / prof.filter_tau;
    return d;
}

SysState sys_advance(const SysState& y, const SysDeriv& d, double h) {
    SysState o = y;
    o.pg += h * d.pg; o.pd += h * d.pd; o.w += h * d.w; o.th += h * d.th;
    o.thc += h * d.thc; o.urg += h * d.urg; o.urd += h * d.urd; o.tau += h * d.tau;
    return o;
}

SysState sys_rk4(double t, const SysState& y, double dt, const InjectionConfig& inj,
                 bool inject, const ScenarioProfile& prof, const MotorParams& p) {
    Vec2 inj_mid{0.0, 0.0};
    const bool frozen = !inject || inj.waveform.piecewise_constant();
    if (inject && frozen)
        inj_mid = inj.u_tilde * inj.waveform.f(inj.omega * (t + 0.5 * dt));
    const auto u_at = [&](double off) {
        if (frozen) return inj_mid;
        return inj.u_tilde * inj.waveform.f(inj.omega * (t + off));
    };
    const SysDeriv k1 = sys_rhs(t, y, u_at(0.0), prof, p);
    const SysDeriv k2 = sys_rhs(t + 0.5 * dt, sys_advance(y, k1, 0.5 * dt), u_at(0.5 * dt), prof, p);
    const SysDeriv k3 = sys_rhs(t + 0.5 * dt, sys_advance(y, k2, 0.5 * dt), u_at(0.5 * dt), prof, p);
    const SysDeriv k4 = sys_rhs(t + dt, sys_advance(y, k3, dt), u_at(dt), prof, p);
    SysState o = y;
    o.pg += dt / 6.0 * (k1.pg + 2.0 * k2.pg + 2.0 * k3.pg + k4.pg);
    o.pd += dt / 6.0 * (k1.pd + 2.0 * k2.pd + 2.0 * k3.pd + k4.pd);
    o.w += dt / 6.0 * (k1.w + 2.0 * k2.w + 2.0 * k3.w + k4.w);
    o.th += dt / 6.0 * (k1.th + 2.0 * k2.th + 2.0 * k3.th + k4.th);
    o.thc += dt / 6.0 * (k1.thc + 2.0 * k2.thc + 2.0 * k3.thc + k4.thc);
    o.urg += dt / 6.0 * (k1.urg + 2.0 * k2.urg + 2.0 * k3.urg + k4.urg);
    o.urd += dt / 6.0 * (k1.urd + 2.0 * k2.urd + 2.0 * k3.urd + k4.urd);
    o.tau += dt / 6.0 * (k1.tau + 2.0 * k2.tau + 2.0 * k3.tau + k4.tau);
    return o;
}

struct LoopSetup {
    double dt = 0.0;
    long nsteps = 0;
    long nsamp = 0;
    bool inject = false;
};

LoopSetup prepare_loop(const ScenarioProfile& profile, const InjectionConfig& inj,
                       const RunOptions& opts) {
    if (!(profile.duration > 0.0)) throw ConfigError("scenario duration must be > 0");
    if (!(opts.sample_rate > 0.0)) throw ConfigError("sample rate must be > 0");
    LoopSetup ls;
    ls.inject = inj.u_tilde.norm() > 0.0;
    if (ls.inject) inj.validate();
    double dt = opts.internal_dt;
    if (dt <= 0.0)
        dt = ls.inject ? inj.period() / 40.0 : 1.0 / (20.0 * opts.sample_rate);
    const double nsamp_f = 1.0 / (opts.sample_rate * dt);
    ls.nsamp = std::lround(nsamp_f);
    if (ls.nsamp < 1 || std::abs(nsamp_f - static_cast<double>(ls.nsamp)) > 1e-9)
        throw ConfigError("internal dt must divide the sampling period");
    if (ls.inject) {
        if (!(dt <= inj.period() / 20.0))
            throw ConfigError("internal dt too coarse to resolve the injection ripple");
        if (inj.waveform.piecewise_constant()) {
            const double half_steps = inj.period() / 2.0 / dt;
            if (std::abs(half_steps - std::round(half_steps)) > 1e-9)
                throw ConfigError("internal dt must divide the square-wave half period");
        }
    }
    ls.dt = dt;
    ls.nsteps = std::lround(profile.duration / dt);
    return ls;
}

}  // namespace

ScenarioTrace run_scenario(const ScenarioProfile& profile, const InjectionConfig& inj,
                           const MotorParams& p, const RunOptions& opts) {
    const LoopSetup ls = prepare_loop(profile, inj, opts);
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const bool noisy = opts.noise_std > 0.0;

    ScenarioTrace trace;
    trace.sample_rate = opts.sample_rate;
    trace.records.reserve(static_cast<size_t>(ls.nsteps / ls.nsamp) + 1);

    SysState y;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * ls.dt;
        if (k % ls.nsamp == 0) {
            const double psi = y.th - y.thc;
            const double c = std::cos(psi), s = std::sin(psi);
            const FluxDQ phi_dq{c * y.pg + s * y.pd, -s * y.pg + c * y.pd};
            const CurrentDQ i_dq = current_from_flux(phi_dq, p);
            Vec2 i_gd{c * i_dq.d - s * i_dq.q, s * i_dq.d + c * i_dq.q};
            Vec2 i_ab = rotate(i_gd, y.thc);
            if (noisy) {
                i_ab.x += opts.noise_std * gauss(rng);
                i_ab.y += opts.noise_std * gauss(rng);
                i_gd = rotate(i_ab, -y.thc);
            }
            TraceRecord r;
            r.t = t;
            const Vec2 base{y.urg, y.urd + profile.omega_c(t) * p.lambda};
            r.u_gd = ls.inject ? injected_voltage(t, base, inj) : base;
            r.i_gd = i_gd;
            r.i_ab = i_ab;
            r.theta = wrap_pi(y.th);
            r.omega = y.w;
            r.theta_c = wrap_pi(y.thc);
            r.tau_L = y.tau;
            trace.records.push_back(r);
        }
        if (k == ls.nsteps) break;
        y = sys_rk4(t, y, ls.dt, inj, ls.inject, profile, p);
        if (k % ls.nsamp == 0) {
            const double psi = y.th - y.thc;
            const double c = std::cos(psi), s = std::sin(psi);
            const FluxDQ phi_dq{c * y.pg + s * y.pd, -s * y.pg + c * y.pd};
            if (!hessian_at_flux(phi_dq, p).positive_definite()) {
                char buf[96];
                std::snprintf(buf, sizeof(buf),
                              "run_scenario: left validity region at t=%.9g s", t + ls.dt);
                throw ValidityError(buf);
            }
        }
    }
    return trace;
}

StateTrace run_scenario_states(const ScenarioProfile& profile, const InjectionConfig& inj,
                               const MotorParams& p, const RunOptions& opts,
                               const Vec2& phi_gd0) {
    const LoopSetup ls = prepare_loop(profile, inj, opts);
    StateTrace st;
    st.sample_rate = opts.sample_rate;
    SysState y;
    y.pg = phi_gd0.x;
    y.pd = phi_gd0.y;
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * ls.dt;
        if (k % ls.nsamp == 0) {
            st.t.push_back(t);
            st.phi_gd.push_back({y.pg, y.pd});
            st.omega.push_back(y.w);
            st.theta.push_back(y.th);
            st.theta_c.push_back(y.thc);
        }
        if (k == ls.nsteps) break;
        y = sys_rk4(t, y, ls.dt, inj, ls.inject, profile, p);
    }
    return st;
}

}  // namespace pmsm
