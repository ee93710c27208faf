#include "pmsm/motor_params.hpp"

#include <cmath>

#include "pmsm/errors.hpp"

namespace pmsm {

MotorParams MotorParams::from_normalized(double R, int n, double lambda, double Ld, double Lq,
                                         double a30n, double a12n, double a40n, double a22n,
                                         double a04n, double J, double In) {
    MotorParams p;
    p.R = R;
    p.n = n;
    p.lambda = lambda;
    p.Ld = Ld;
    p.Lq = Lq;
    p.J = J;
    p.In = In;
    p.a30 = a30n / (Ld * Ld * In);
    p.a12 = a12n / (Ld * Lq * In);
    p.a40 = a40n / (Ld * Ld * Ld * In * In);
    p.a22 = a22n / (Ld * Lq * Lq * In * In);
    p.a04 = a04n / (Lq * Lq * Lq * In * In);
    p.validate();
    return p;
}

MotorParams MotorParams::without_saturation() const {
    MotorParams p = *this;
    p.a30 = p.a12 = p.a40 = p.a22 = p.a04 = 0.0;
    return p;
}

void MotorParams::validate() const {
    if (!(R > 0.0)) throw ConfigError("MotorParams: R must be > 0");
    if (n < 1) throw ConfigError("MotorParams: n must be >= 1");
    if (!(lambda >= 0.0)) throw ConfigError("MotorParams: lambda must be >= 0");
    if (!(Ld > 0.0) || !(Lq > 0.0)) throw ConfigError("MotorParams: Ld, Lq must be > 0");
    if (!(J > 0.0)) throw ConfigError("MotorParams: J must be > 0");
    if (!(In > 0.0)) throw ConfigError("MotorParams: In must be > 0");
    for (double a : {a30, a12, a40, a22, a04})
        if (!std::isfinite(a)) throw ConfigError("MotorParams: saturation coefficient not finite");
}

MotorParams MotorParams::from_config(const KeyValueFile& kv) {
    MotorParams p;
    p.R = kv.get_double("R");
    p.n = kv.get_int("n");
    p.lambda = kv.get_double("lambda");
    p.Ld = kv.get_double("Ld");
    p.Lq = kv.get_double("Lq");
    p.J = kv.get_double("J");
    p.In = kv.get_double("In");
    p.omega_rated = kv.get_double_or("omega_rated", 0.0);
    const bool raw = kv.has("a30") || kv.has("a12") || kv.has("a40") || kv.has("a22") || kv.has("a04");
    const bool norm = kv.has("a30_norm") || kv.has("a12_norm") || kv.has("a40_norm") ||
                      kv.has("a22_norm") || kv.has("a04_norm");
    if (raw && norm)
        throw ConfigError("motor config mixes raw a* and normalized a*_norm keys");
    if (norm) {
        MotorParams q = from_normalized(
            p.R, p.n, p.lambda, p.Ld, p.Lq,
            kv.get_double_or("a30_norm", 0.0), kv.get_double_or("a12_norm", 0.0),
            kv.get_double_or("a40_norm", 0.0), kv.get_double_or("a22_norm", 0.0),
            kv.get_double_or("a04_norm", 0.0), p.J, p.In);
        q.omega_rated = p.omega_rated;
        return q;
    }
    p.a30 = kv.get_double_or("a30", 0.0);
    p.a12 = kv.get_double_or("a12", 0.0);
    p.a40 = kv.get_double_or("a40", 0.0);
    p.a22 = kv.get_double_or("a22", 0.0);
    p.a04 = kv.get_double_or("a04", 0.0);
    p.validate();
    return p;
}

MotorParams MotorParams::load(const std::string& path) {
    return from_config(KeyValueFile::load(path));
}

KeyValueFile MotorParams::to_config() const {
    KeyValueFile kv;
    kv.set("R", R);
    kv.set("n", static_cast<double>(n));
    kv.set("lambda", lambda);
    kv.set("Ld", Ld);
    kv.set("Lq", Lq);
    kv.set("a30", a30);
    kv.set("a12", a12);
    kv.set("a40", a40);
    kv.set("a22", a22);
    kv.set("a04", a04);
    kv.set("J", J);
    kv.set("In", In);
    if (omega_rated > 0.0) kv.set("omega_rated", omega_rated);
    return kv;
}

}  // namespace pmsm
