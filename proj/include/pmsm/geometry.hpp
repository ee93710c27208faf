#pragma once

#include <array>
#include <cmath>

namespace pmsm {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// 2-vector used for dq / alpha-beta / gamma-delta quantities.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double max_abs() const { return std::max(std::abs(x), std::abs(y)); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// General 2x2 matrix (row major).
struct Mat22 {
    double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

    Vec2 operator*(const Vec2& v) const {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }
    Mat22 operator*(const Mat22& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat22 operator-(const Mat22& o) const {
        return {a11 - o.a11, a12 - o.a12, a21 - o.a21, a22 - o.a22};
    }
    Mat22 transpose() const { return {a11, a21, a12, a22}; }
    double det() const { return a11 * a22 - a12 * a21; }
};

/// Symmetric 2x2 matrix stored as three scalars; symmetric by representation.
struct SymMatrix2 {
    double dd = 0.0;  ///< (1,1) entry
    double dq = 0.0;  ///< off-diagonal entry
    double qq = 0.0;  ///< (2,2) entry

    Vec2 operator*(const Vec2& v) const {
        return {dd * v.x + dq * v.y, dq * v.x + qq * v.y};
    }
    double det() const { return dd * qq - dq * dq; }
    double trace() const { return dd + qq; }
    bool positive_definite() const { return dd > 0.0 && det() > 0.0; }
    Mat22 full() const { return {dd, dq, dq, qq}; }
};

/// Rotation matrix M_mu = [[cos, -sin], [sin, cos]].
inline Mat22 rotation(double mu) {
    const double c = std::cos(mu), s = std::sin(mu);
    return {c, -s, s, c};
}

/// Rotate v by angle mu.
inline Vec2 rotate(const Vec2& v, double mu) {
    const double c = std::cos(mu), s = std::sin(mu);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// The skew matrix K = [[0, -1], [1, 0]] applied to v.
inline Vec2 skew_apply(const Vec2& v) { return {-v.y, v.x}; }

/// Wrap an angle to ]-pi, pi].
inline double wrap_pi(double angle) {
    double y = std::remainder(angle, kTwoPi);
    if (y <= -kPi) y += kTwoPi;
    return y;
}

inline double deg_from_rad(double rad) { return rad * 180.0 / kPi; }
inline double rad_from_deg(double deg) { return deg * kPi / 180.0; }

}  // namespace pmsm
