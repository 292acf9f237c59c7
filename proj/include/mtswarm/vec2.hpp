#pragma once

#include <cmath>

namespace mtswarm {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator-(Vec2 a) { return {-a.x, -a.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
    friend constexpr Vec2 operator/(Vec2 a, double s) { return {a.x / s, a.y / s}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }
constexpr double norm2(Vec2 a) { return dot(a, a); }
inline bool is_finite(Vec2 a) { return std::isfinite(a.x) && std::isfinite(a.y); }

/// Unit vector along `a`; the zero vector maps to itself.
inline Vec2 normalized(Vec2 a) {
    const double n = norm(a);
    return n > 0.0 ? a / n : Vec2{};
}

/// Row-major 2x2 matrix.
struct Mat2 {
    double xx = 0.0, xy = 0.0;
    double yx = 0.0, yy = 0.0;

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    /// Outer product u u^T.
    static constexpr Mat2 outer(Vec2 u) { return {u.x * u.x, u.x * u.y, u.y * u.x, u.y * u.y}; }

    friend constexpr Vec2 operator*(const Mat2& m, Vec2 v) {
        return {m.xx * v.x + m.xy * v.y, m.yx * v.x + m.yy * v.y};
    }
    friend constexpr Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.xx + b.xx, a.xy + b.xy, a.yx + b.yx, a.yy + b.yy};
    }
    friend constexpr Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.xx - b.xx, a.xy - b.xy, a.yx - b.yx, a.yy - b.yy};
    }
    friend constexpr Mat2 operator*(double s, const Mat2& a) {
        return {s * a.xx, s * a.xy, s * a.yx, s * a.yy};
    }
};

/// Square periodic simulation domain [0, side)^2.
struct SimBox {
    double side = 50.0;

    /// Throws std::invalid_argument unless side > 4 (in units of the filament diameter).
    void validate() const;

    /// Maps a position into [0, side) on both axes.
    Vec2 wrap(Vec2 p) const;
};

namespace detail {
inline double periodic_image(double d, double side) {
    const double half = 0.5 * side;
    if (d > half) {
        d -= side;
    } else if (d <= -half) {
        d += side;
    }
    if (d > half || d <= -half) d -= side * std::ceil(d / side - 0.5);
    return d;
}
}  // namespace detail

/// Shortest periodic displacement b - a; each component lies in (-side/2, side/2].
inline Vec2 minimum_image(Vec2 a, Vec2 b, const SimBox& box) {
    return {detail::periodic_image(b.x - a.x, box.side), detail::periodic_image(b.y - a.y, box.side)};
}

}  // namespace mtswarm
