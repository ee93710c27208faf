#pragma once

#include <string>
#include <vector>

#include "pmsm/geometry.hpp"

namespace pmsm {

enum class WaveformKind { Square, Sine, Table };

/// 2*pi-periodic zero-mean injection waveform f and its zero-mean primitive F.
///
/// Built-ins:
///   square: f = +1 on [0, pi), -1 on [pi, 2*pi); F is the triangle with peak
///           pi/2 at sigma = pi.
///   sine:   f = sin, F = -cos.
/// User tables are one uniformly sampled period, evaluated by linear
/// interpolation with the mean removed at load.
class Waveform {
  public:
    static Waveform square();
    static Waveform sine();
    /// `values` sample one period at sigma_k = 2*pi*k/N. Zero mean is enforced
    /// numerically; the check tolerance on the removed mean is reported by
    /// removed_mean().
    static Waveform from_table(std::vector<double> values);
    /// Two-column CSV (sigma, f) covering exactly one period.
    static Waveform from_table_file(const std::string& path);

    WaveformKind kind() const { return kind_; }

    double f(double sigma) const;  ///< waveform value
    double F(double sigma) const;  ///< zero-mean primitive of f

    /// True when f is constant between its jump points (square / step tables).
    /// Integrators hold such waveforms constant across a step.
    bool piecewise_constant() const { return kind_ == WaveformKind::Square; }

    double max_F() const;                ///< max of |F| over one period
    double integral_F_squared() const;   ///< int_0^{2pi} F(s)^2 ds
    double mean_F_squared() const;       ///< (1/2pi) int_0^{2pi} F(s)^2 ds
    /// kappa = int F2^2 / int F^2 where F2 is the zero-mean primitive of F;
    /// the waveform factor of the (R G / Omega)^2 ripple-filtering correction.
    double ripple_filter_kappa() const;

    double removed_mean() const { return removed_mean_; }

  private:
    Waveform() = default;
    void build_tables();

    WaveformKind kind_ = WaveformKind::Square;
    std::vector<double> table_;    // f samples over one period (Table kind)
    std::vector<double> F_table_;  // F samples (Table kind)
    double removed_mean_ = 0.0;
    double max_F_ = 0.0;
    double int_F2_ = 0.0;
    double kappa_ = 0.0;
};

/// Injection settings: pulsation Omega [rad/s], amplitude vector in the
/// gamma-delta frame [V], waveform shape.
struct InjectionConfig {
    double omega = 0.0;   ///< Omega [rad/s], > 0
    Vec2 u_tilde;         ///< injected amplitude [V]
    Waveform waveform = Waveform::square();

    double period() const { return kTwoPi / omega; }
    void validate() const;  ///< throws ConfigError on omega <= 0 etc.
};

/// u(t) = base + u_tilde * f(Omega t).
Vec2 injected_voltage(double t, const Vec2& base_u, const InjectionConfig& cfg);

}  // namespace pmsm
