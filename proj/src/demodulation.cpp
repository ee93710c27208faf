#include "pmsm/demodulation.hpp"

#include <cmath>

#include "pmsm/errors.hpp"

namespace pmsm {

namespace {

int samples_per_period(double sample_rate, const InjectionConfig& cfg) {
    const double per = sample_rate * cfg.period();
    const int n = static_cast<int>(std::lround(per));
    if (n < 8 || std::abs(per - static_cast<double>(n)) > 1e-6)
        throw ConfigError("demodulate: sample rate must give an integer number (>= 8) of "
                          "samples per injection period");
    return n;
}

}  // namespace

std::vector<DemodulatedCurrents> demodulate(const std::vector<double>& t,
                                            const std::vector<Vec2>& i,
                                            const InjectionConfig& cfg,
                                            const DemodulationOptions& opts) {
    cfg.validate();
    if (t.size() != i.size()) throw ConfigError("demodulate: time/current size mismatch");
    if (opts.window_periods < 1) throw ConfigError("demodulate: window_periods must be >= 1");
    std::vector<DemodulatedCurrents> out;
    if (t.size() < 2) return out;
    const double dt = t[1] - t[0];
    if (!(dt > 0.0)) throw ConfigError("demodulate: non-increasing timestamps");
    const int nper = samples_per_period(1.0 / dt, cfg);
    const int window = nper * opts.window_periods;
    if (static_cast<int>(t.size()) <= window) return out;  // empty region, not an error

    // trapezoid weights over the trailing window (half weights at both ends)
    const auto weight = [&](int j) { return (j == 0 || j == window) ? 0.5 : 1.0; };

    out.reserve(t.size() - static_cast<size_t>(window));
    for (size_t k = static_cast<size_t>(window); k < t.size(); ++k) {
        double den = 0.0;
        Vec2 mean{0.0, 0.0}, corr{0.0, 0.0};
        for (int j = 0; j <= window; ++j) {
            const size_t idx = k - static_cast<size_t>(window) + static_cast<size_t>(j);
            const double w = weight(j);
            const double Fv = cfg.waveform.F(cfg.omega * t[idx]);
            mean += w * i[idx];
            corr += (w * Fv) * i[idx];
            den += w * Fv * Fv;
        }
        DemodulatedCurrents d;
        d.t = t[k];
        d.i_bar = {mean.x / window, mean.y / window};
        d.i_tilde = {corr.x / den, corr.y / den};
        out.push_back(d);
    }
    return out;
}

StreamingDemodulator::StreamingDemodulator(double sample_rate, const InjectionConfig& cfg,
                                           const DemodulationOptions& opts)
    : cfg_(cfg) {
    cfg_.validate();
    if (opts.window_periods < 1)
        throw ConfigError("StreamingDemodulator: window_periods must be >= 1");
    window_ = samples_per_period(sample_rate, cfg) * opts.window_periods;
    buf_.resize(static_cast<size_t>(window_) + 1);
    tbuf_.resize(static_cast<size_t>(window_) + 1);
}

std::optional<DemodulatedCurrents> StreamingDemodulator::push(double t, const Vec2& i) {
    const size_t slot = static_cast<size_t>(count_ % (window_ + 1));
    buf_[slot] = i;
    tbuf_[slot] = t;
    ++count_;
    if (count_ <= window_) return std::nullopt;

    double den = 0.0;
    Vec2 mean{0.0, 0.0}, corr{0.0, 0.0};
    for (int j = 0; j <= window_; ++j) {
        const size_t idx = static_cast<size_t>((count_ - 1 - window_ + j) % (window_ + 1));
        const double w = (j == 0 || j == window_) ? 0.5 : 1.0;
        const double Fv = cfg_.waveform.F(cfg_.omega * tbuf_[idx]);
        mean += w * buf_[idx];
        corr += (w * Fv) * buf_[idx];
        den += w * Fv * Fv;
    }
    DemodulatedCurrents d;
    d.t = t;
    d.i_bar = {mean.x / window_, mean.y / window_};
    d.i_tilde = {corr.x / den, corr.y / den};
    return d;
}

std::vector<DemodulatedCurrents> smooth_one_period(const std::vector<DemodulatedCurrents>& in,
                                                   int samples_per_period) {
    const int n = samples_per_period;
    if (n < 1) throw ConfigError("smooth_one_period: samples_per_period must be >= 1");
    std::vector<DemodulatedCurrents> out;
    if (static_cast<int>(in.size()) < n) return out;
    out.reserve(in.size() - static_cast<size_t>(n) + 1);
    for (size_t k = static_cast<size_t>(n) - 1; k < in.size(); ++k) {
        DemodulatedCurrents d;
        d.t = in[k].t;
        Vec2 b{0.0, 0.0}, tl{0.0, 0.0};
        for (int j = 0; j < n; ++j) {
            const auto& s = in[k - static_cast<size_t>(j)];
            b += s.i_bar.vec();
            tl += s.i_tilde.vec();
        }
        d.i_bar = {b.x / n, b.y / n};
        d.i_tilde = {tl.x / n, tl.y / n};
        out.push_back(d);
    }
    return out;
}

}  // namespace pmsm
