#pragma once

#include <optional>
#include <vector>

#include "pmsm/demodulation.hpp"
#include "pmsm/injection.hpp"
#include "pmsm/magnetics.hpp"

namespace pmsm {

/// Rotor angle estimate from one demodulated sample.
struct PositionEstimate {
    double theta_hat = 0.0;  ///< electrical angle, wrapped to ]-pi, pi]
    double residual = 0.0;   ///< minimized objective value [A^2]
    bool ambiguity = false;  ///< a second near-equal minimum exists
};

/// How the estimator evaluates the saliency model.
enum class SaliencyModel {
    FirstOrder,  ///< closed-form first-order admittance at the rotated current
    Exact,       ///< admittance at the exactly inverted operating flux
};

struct EstimatorOptions {
    SaliencyModel saliency = SaliencyModel::Exact;
    /// Compensate the (R G / Omega)^2 low-pass filtering of the ripple by the
    /// stator resistance in the model prediction.
    bool ripple_filter_correction = true;
    /// Waveform factor of that correction (Waveform::ripple_filter_kappa());
    /// defaults to the square-wave value pi^2/10.
    double ripple_filter_kappa = kPi * kPi / 10.0;
    /// Second minimum counts as ambiguous when its residual is within this
    /// ratio of the best minimum...
    double ambiguity_ratio = 1.2;
    /// ...or when both residuals are below (floor * |i_tilde|)^2, i.e. both
    /// fits are within plausible measurement error.
    double ambiguity_rel_floor = 1e-2;
    int grid_points = 360;        ///< coarse argmin grid over ]-pi, pi]
    double refine_tol = 1e-4;     ///< golden-section bracket tolerance [rad]
};

/// Model ripple prediction S(mu, i_bar) * u_tilde / Omega (with optional
/// ripple-filter correction), in the same frame as i_bar.
Vec2 predicted_ripple(double mu, const CurrentDQ& i_bar, const Vec2& u_tilde, double omega_inj,
                      const MotorParams& p, const EstimatorOptions& opts = {});

/// Residual |i_tilde - S(mu, i_bar) u_tilde / Omega|^2 with the first-order
/// saliency model (the estimator objective at its default options uses
/// predicted_ripple instead).
double residual(double mu, const DemodulatedCurrents& d, const Vec2& u_tilde, double omega_inj,
                const MotorParams& p);

/// Estimate the rotor angle from one demodulated sample: theta_c plus the
/// argmin of the ripple-prediction residual over ]-pi, pi] (coarse grid +
/// golden-section refinement). When a second near-equal minimum exists the
/// ambiguity flag is set and the candidate nearest `hint` is preferred.
/// Throws ValidityError when no grid point evaluates inside the validity
/// region.
PositionEstimate estimate(const DemodulatedCurrents& d, double theta_c, const Vec2& u_tilde,
                          double omega_inj, const MotorParams& p,
                          std::optional<double> hint = std::nullopt,
                          const EstimatorOptions& opts = {});

/// Hint-chained estimation over a demodulated series (hint seeded with
/// `initial_hint`, then the previous estimate). Angles theta_c must be
/// supplied per sample.
std::vector<PositionEstimate> estimate_series(const std::vector<DemodulatedCurrents>& series,
                                              const std::vector<double>& theta_c,
                                              const Vec2& u_tilde, double omega_inj,
                                              const MotorParams& p, double initial_hint = 0.0,
                                              const EstimatorOptions& opts = {});

}  // namespace pmsm
