#include "pmsm/estimator.hpp"

#include <cmath>
#include <limits>

#include "pmsm/errors.hpp"

namespace pmsm {

namespace {

/// Objective value at mu; +inf when outside the validity region.
double objective(double mu, const DemodulatedCurrents& d, const Vec2& u_tilde, double omega_inj,
                 const MotorParams& p, const EstimatorOptions& opts) {
    try {
        const Vec2 pred = predicted_ripple(mu, d.i_bar, u_tilde, omega_inj, p, opts);
        const Vec2 e = d.i_tilde.vec() - pred;
        return e.dot(e);
    } catch (const ValidityError&) {
        return std::numeric_limits<double>::infinity();
    } catch (const ConvergenceError&) {
        return std::numeric_limits<double>::infinity();
    }
}

struct Minimum {
    double mu = 0.0;
    double value = std::numeric_limits<double>::infinity();
};

template <typename F>
Minimum golden_refine(F&& fun, double lo, double hi, double tol) {
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - gr * (b - a), dpt = a + gr * (b - a);
    double fc = fun(c), fd = fun(dpt);
    while (b - a > tol) {
        if (fc < fd) {
            b = dpt;
            dpt = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = fun(c);
        } else {
            a = c;
            c = dpt;
            fc = fd;
            dpt = a + gr * (b - a);
            fd = fun(dpt);
        }
    }
    Minimum m;
    m.mu = 0.5 * (a + b);
    m.value = fun(m.mu);
    return m;
}

}  // namespace

Vec2 predicted_ripple(double mu, const CurrentDQ& i_bar, const Vec2& u_tilde, double omega_inj,
                      const MotorParams& p, const EstimatorOptions& opts) {
    const Mat22 S = opts.saliency == SaliencyModel::Exact
                        ? saliency_matrix_exact(mu, i_bar, p)
                        : saliency_matrix(mu, i_bar, p);
    const Vec2 v{u_tilde.x / omega_inj, u_tilde.y / omega_inj};
    Vec2 pred = S * v;
    if (opts.ripple_filter_correction) {
        // measured ripple ~ (I - kappa (R S / Omega)^2) S v: the injection sees
        // the electrical pole R*G as a low-pass
        const double scale = (p.R / omega_inj) * (p.R / omega_inj);
        pred = pred - (opts.ripple_filter_kappa * scale) * (S * (S * pred));
    }
    return pred;
}

double residual(double mu, const DemodulatedCurrents& d, const Vec2& u_tilde, double omega_inj,
                const MotorParams& p) {
    const Mat22 S = saliency_matrix(mu, d.i_bar, p);
    const Vec2 v{u_tilde.x / omega_inj, u_tilde.y / omega_inj};
    const Vec2 e = d.i_tilde.vec() - S * v;
    return e.dot(e);
}

PositionEstimate estimate(const DemodulatedCurrents& d, double theta_c, const Vec2& u_tilde,
                          double omega_inj, const MotorParams& p, std::optional<double> hint,
                          const EstimatorOptions& opts) {
    if (!(u_tilde.norm() > 0.0)) throw ConfigError("estimate: |u_tilde| must be > 0");
    const int n = opts.grid_points;
    std::vector<double> grid_val(static_cast<size_t>(n));
    const double dmu = kTwoPi / n;
    int best = -1;
    for (int k = 0; k < n; ++k) {
        const double mu = -kPi + (k + 0.5) * dmu;
        grid_val[static_cast<size_t>(k)] = objective(mu, d, u_tilde, omega_inj, p, opts);
        if (best < 0 || grid_val[static_cast<size_t>(k)] < grid_val[static_cast<size_t>(best)])
            best = k;
    }
    if (!std::isfinite(grid_val[static_cast<size_t>(best)]))
        throw ValidityError("estimate: saliency model invalid over the whole angle grid");

    const auto mu_of = [&](int k) { return -kPi + (k + 0.5) * dmu; };
    const auto fun = [&](double mu) { return objective(mu, d, u_tilde, omega_inj, p, opts); };

    const Minimum first = golden_refine(fun, mu_of(best) - dmu, mu_of(best) + dmu,
                                        opts.refine_tol);

    // second-best local minimum away from the first basin
    const int excl = n / 8;
    Minimum second;
    int second_idx = -1;
    for (int k = 0; k < n; ++k) {
        int delta = std::abs(k - best);
        delta = std::min(delta, n - delta);
        if (delta <= excl) continue;
        const double v = grid_val[static_cast<size_t>(k)];
        if (!std::isfinite(v)) continue;
        const double prev = grid_val[static_cast<size_t>((k + n - 1) % n)];
        const double next = grid_val[static_cast<size_t>((k + 1) % n)];
        if (v <= prev && v <= next && (second_idx < 0 || v < second.value)) {
            second_idx = k;
            second.value = v;
        }
    }
    if (second_idx >= 0)
        second = golden_refine(fun, mu_of(second_idx) - dmu, mu_of(second_idx) + dmu,
                               opts.refine_tol);

    PositionEstimate out;
    const double tilde_scale = d.i_tilde.vec().dot(d.i_tilde.vec());
    const double floor = opts.ambiguity_rel_floor * opts.ambiguity_rel_floor * tilde_scale;
    bool ambiguous = false;
    if (second_idx >= 0)
        ambiguous = second.value <= std::max(opts.ambiguity_ratio * first.value, floor);

    Minimum chosen = first;
    if (ambiguous && hint.has_value()) {
        const double d1 = std::abs(wrap_pi(theta_c + first.mu - *hint));
        const double d2 = std::abs(wrap_pi(theta_c + second.mu - *hint));
        if (d2 < d1) chosen = second;
    }
    out.theta_hat = wrap_pi(theta_c + chosen.mu);
    out.residual = chosen.value;
    out.ambiguity = ambiguous;
    return out;
}

std::vector<PositionEstimate> estimate_series(const std::vector<DemodulatedCurrents>& series,
                                              const std::vector<double>& theta_c,
                                              const Vec2& u_tilde, double omega_inj,
                                              const MotorParams& p, double initial_hint,
                                              const EstimatorOptions& opts) {
    if (series.size() != theta_c.size())
        throw ConfigError("estimate_series: series/theta_c size mismatch");
    std::vector<PositionEstimate> out;
    out.reserve(series.size());
    double hint = initial_hint;
    for (size_t k = 0; k < series.size(); ++k) {
        const PositionEstimate e = estimate(series[k], theta_c[k], u_tilde, omega_inj, p,
                                            hint, opts);
        hint = e.theta_hat;
        out.push_back(e);
    }
    return out;
}

}  // namespace pmsm
