#include "pmsm/injection.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pmsm/errors.hpp"

namespace pmsm {

namespace {

double wrap_period(double sigma) {
    double s = std::fmod(sigma, kTwoPi);
    if (s < 0.0) s += kTwoPi;
    return s;
}

/// Integral of the square of a piecewise-linear periodic function given at
/// uniform nodes (node N wraps to node 0).
double integral_sq_pwl(const std::vector<double>& v, double h) {
    double acc = 0.0;
    const size_t n = v.size();
    for (size_t k = 0; k < n; ++k) {
        const double a = v[k], b = v[(k + 1) % n];
        acc += h / 3.0 * (a * a + a * b + b * b);
    }
    return acc;
}

/// Cumulative trapezoid of a uniform periodic table, mean removed.
std::vector<double> zero_mean_primitive(const std::vector<double>& v, double h) {
    const size_t n = v.size();
    std::vector<double> prim(n, 0.0);
    for (size_t k = 0; k + 1 < n; ++k)
        prim[k + 1] = prim[k] + 0.5 * (v[k] + v[(k + 1) % n]) * h;
    // mean of the piecewise-linear interpolant
    double mean = 0.0;
    for (size_t k = 0; k < n; ++k)
        mean += 0.5 * (prim[k] + prim[(k + 1) % n]) * h;
    mean /= kTwoPi;
    for (double& x : prim) x -= mean;
    return prim;
}

}  // namespace

Waveform Waveform::square() {
    Waveform w;
    w.kind_ = WaveformKind::Square;
    w.max_F_ = kPi / 2.0;
    w.int_F2_ = kPi * kPi * kPi / 6.0;
    w.kappa_ = kPi * kPi / 10.0;
    return w;
}

Waveform Waveform::sine() {
    Waveform w;
    w.kind_ = WaveformKind::Sine;
    w.max_F_ = 1.0;
    w.int_F2_ = kPi;
    w.kappa_ = 1.0;
    return w;
}

Waveform Waveform::from_table(std::vector<double> values) {
    if (values.size() < 8)
        throw ConfigError("waveform table needs at least 8 samples per period");
    Waveform w;
    w.kind_ = WaveformKind::Table;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    for (double& v : values) v -= mean;
    w.removed_mean_ = mean;
    w.table_ = std::move(values);
    w.build_tables();
    return w;
}

Waveform Waveform::from_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open waveform table: " + path);
    std::vector<double> values;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string sig, val;
        if (!std::getline(ls, sig, ',') || !std::getline(ls, val))
            throw ConfigError("waveform table line needs 'sigma,f': " + line);
        try {
            values.push_back(std::stod(val));
        } catch (const std::exception&) {
            if (first) { first = false; continue; }  // header row
            throw ConfigError("waveform table: bad value '" + val + "'");
        }
        first = false;
    }
    return from_table(std::move(values));
}

void Waveform::build_tables() {
    const size_t n = table_.size();
    const double h = kTwoPi / static_cast<double>(n);
    F_table_ = zero_mean_primitive(table_, h);
    // numeric zero-mean re-check after removal
    double mean = 0.0;
    for (double v : table_) mean += v;
    mean /= static_cast<double>(n);
    if (std::abs(mean) > 1e-12)
        throw ConfigError("waveform table: mean removal failed");
    max_F_ = 0.0;
    for (double v : F_table_) max_F_ = std::max(max_F_, std::abs(v));
    int_F2_ = integral_sq_pwl(F_table_, h);
    const std::vector<double> F2 = zero_mean_primitive(F_table_, h);
    kappa_ = integral_sq_pwl(F2, h) / int_F2_;
}

double Waveform::f(double sigma) const {
    const double s = wrap_period(sigma);
    switch (kind_) {
        case WaveformKind::Square:
            return s < kPi ? 1.0 : -1.0;
        case WaveformKind::Sine:
            return std::sin(s);
        case WaveformKind::Table: {
            const size_t n = table_.size();
            const double h = kTwoPi / static_cast<double>(n);
            const double x = s / h;
            const size_t k = std::min(static_cast<size_t>(x), n - 1);
            const double frac = x - static_cast<double>(k);
            return table_[k] * (1.0 - frac) + table_[(k + 1) % n] * frac;
        }
    }
    return 0.0;
}

double Waveform::F(double sigma) const {
    const double s = wrap_period(sigma);
    switch (kind_) {
        case WaveformKind::Square:
            return s < kPi ? s - kPi / 2.0 : 1.5 * kPi - s;
        case WaveformKind::Sine:
            return -std::cos(s);
        case WaveformKind::Table: {
            const size_t n = F_table_.size();
            const double h = kTwoPi / static_cast<double>(n);
            const double x = s / h;
            const size_t k = std::min(static_cast<size_t>(x), n - 1);
            const double frac = x - static_cast<double>(k);
            return F_table_[k] * (1.0 - frac) + F_table_[(k + 1) % n] * frac;
        }
    }
    return 0.0;
}

double Waveform::max_F() const { return max_F_; }
double Waveform::integral_F_squared() const { return int_F2_; }
double Waveform::mean_F_squared() const { return int_F2_ / kTwoPi; }
double Waveform::ripple_filter_kappa() const { return kappa_; }

void InjectionConfig::validate() const {
    if (!(omega > 0.0)) throw ConfigError("InjectionConfig: omega must be > 0");
    if (!std::isfinite(u_tilde.x) || !std::isfinite(u_tilde.y))
        throw ConfigError("InjectionConfig: u_tilde not finite");
}

Vec2 injected_voltage(double t, const Vec2& base_u, const InjectionConfig& cfg) {
    return base_u + cfg.u_tilde * cfg.waveform.f(cfg.omega * t);
}

}  // namespace pmsm
