#pragma once

#include <optional>
#include <vector>

#include "pmsm/injection.hpp"
#include "pmsm/magnetics.hpp"

namespace pmsm {

/// Slowly-varying component and ripple amplitude of a sampled current,
/// both in the frame of the input samples. Defined only for t >= one
/// injection period (the trailing correlation window must be full).
struct DemodulatedCurrents {
    double t = 0.0;
    CurrentDQ i_bar;    ///< window mean [A]
    CurrentDQ i_tilde;  ///< ripple amplitude (coefficient of F(Omega t)) [A]
};

struct DemodulationOptions {
    int window_periods = 1;  ///< correlation window length in injection periods
};

/// Moving-window correlation with F over the trailing window:
///   i_bar(t)   = (1/T) int_{t-T}^{t} i ds
///   i_tilde(t) = int_{t-T}^{t} i F(Omega s) ds / int F(Omega s)^2 ds
/// by trapezoidal quadrature on the sample grid, normalized by the discrete
/// quadrature of F^2 on the same grid. Output advances one sample at a time.
///
/// Preconditions: fixed sample rate with an integer number (>= 8) of samples
/// per injection period (ConfigError otherwise). Fewer samples than one
/// window yields an empty result, not an error.
std::vector<DemodulatedCurrents> demodulate(const std::vector<double>& t,
                                            const std::vector<Vec2>& i,
                                            const InjectionConfig& cfg,
                                            const DemodulationOptions& opts = {});

/// Streaming variant holding a ring buffer of one window; one instance per
/// stream, not thread-safe across streams without external coordination.
class StreamingDemodulator {
  public:
    StreamingDemodulator(double sample_rate, const InjectionConfig& cfg,
                         const DemodulationOptions& opts = {});

    /// Feed one sample; returns the demodulated value once the window is full.
    std::optional<DemodulatedCurrents> push(double t, const Vec2& i);

    int samples_per_window() const { return window_; }

  private:
    InjectionConfig cfg_;
    int window_ = 0;
    std::vector<Vec2> buf_;
    std::vector<double> tbuf_;
    long count_ = 0;
};

/// Trailing mean over one injection period of demodulated outputs. Cancels
/// the window-phase-dependent leakage of current drift into i_tilde (the
/// leakage coefficient is proportional to the zero-mean primitive of F at the
/// window phase, whose mean over phases vanishes). Output timestamps keep the
/// last sample's time; the content represents roughly one period earlier.
std::vector<DemodulatedCurrents> smooth_one_period(const std::vector<DemodulatedCurrents>& in,
                                                   int samples_per_period);

}  // namespace pmsm
