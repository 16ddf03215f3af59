#pragma once

// Core 3D types and intersection primitives for the scene synthesizer.

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>

namespace risim {

struct Vec3 {
    double x{0}, y{0}, z{0};

    Vec3() = default;
    constexpr Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
    constexpr Vec3 operator-() const { return {-x, -y, -z}; }

    friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

    static constexpr double dot(const Vec3& a, const Vec3& b) {
        return a.x * b.x + a.y * b.y + a.z * b.z;
    }
    static constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
        return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
    }
    double norm() const { return std::sqrt(dot(*this, *this)); }
    Vec3 normalized() const {
        const double n = norm();
        return {x / n, y / n, z / n};
    }
    bool finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

// Direction relative to the RIS: azimuth in the aperture's horizontal plane,
// zenith measured from the local vertical axis. Boresight is (0, pi/2).
struct Direction {
    double azimuth{0};
    double zenith{M_PI / 2};
};

// Unit propagation vector in the RIS-local frame (boresight +x, horizontal y,
// vertical z): u = (sin ze cos az, sin ze sin az, cos ze).
inline Vec3 unit_from_direction(const Direction& d) {
    const double sz = std::sin(d.zenith);
    return {sz * std::cos(d.azimuth), sz * std::sin(d.azimuth), std::cos(d.zenith)};
}

inline Direction direction_from_unit(const Vec3& u) {
    double cz = u.z;
    if (cz > 1.0) cz = 1.0;
    if (cz < -1.0) cz = -1.0;
    return {std::atan2(u.y, u.x), std::acos(cz)};
}

// Orthonormal local frame of the RIS aperture. The aperture lies in the
// horizontal/vertical plane; boresight is the outward normal.
struct Frame {
    Vec3 boresight{1, 0, 0};
    Vec3 horizontal{0, 1, 0};
    Vec3 vertical{0, 0, 1};

    Vec3 to_local(const Vec3& world) const {
        return {Vec3::dot(world, boresight), Vec3::dot(world, horizontal),
                Vec3::dot(world, vertical)};
    }
    Vec3 to_world(const Vec3& local) const {
        return boresight * local.x + horizontal * local.y + vertical * local.z;
    }

    void validate(double tol = 1e-9) const {
        const bool unit = std::abs(boresight.norm() - 1.0) <= tol &&
                          std::abs(horizontal.norm() - 1.0) <= tol &&
                          std::abs(vertical.norm() - 1.0) <= tol;
        const bool ortho = std::abs(Vec3::dot(boresight, horizontal)) <= tol &&
                           std::abs(Vec3::dot(boresight, vertical)) <= tol &&
                           std::abs(Vec3::dot(horizontal, vertical)) <= tol;
        if (!unit || !ortho)
            throw std::invalid_argument("Frame: axes must be orthonormal");
    }
};

// Planar quad with a scalar power reflection coefficient.
struct Facet {
    std::array<Vec3, 4> vertices;
    double reflectivity{1.0};

    Vec3 normal() const {
        return Vec3::cross(vertices[1] - vertices[0], vertices[2] - vertices[0])
            .normalized();
    }

    void validate() const {
        for (const auto& v : vertices)
            if (!v.finite()) throw std::invalid_argument("Facet: non-finite vertex");
        if (!(reflectivity >= 0.0 && reflectivity <= 1.0))
            throw std::invalid_argument("Facet: reflectivity must be in [0, 1]");
        const Vec3 n = normal();
        if (std::abs(Vec3::dot(vertices[3] - vertices[0], n)) > 1e-9)
            throw std::invalid_argument("Facet: vertices not coplanar within 1e-9 m");
    }
};

namespace detail {

constexpr double kRayEps = 1e-9;

// Moeller-Trumbore. Returns the ray parameter t > kRayEps, or nothing.
inline std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir,
                                          const Vec3& v0, const Vec3& v1,
                                          const Vec3& v2) {
    const Vec3 e1 = v1 - v0;
    const Vec3 e2 = v2 - v0;
    const Vec3 p = Vec3::cross(dir, e2);
    const double det = Vec3::dot(e1, p);
    if (std::abs(det) < 1e-15) return std::nullopt;
    const double inv_det = 1.0 / det;
    const Vec3 s = origin - v0;
    const double u = Vec3::dot(s, p) * inv_det;
    if (u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
    const Vec3 q = Vec3::cross(s, e1);
    const double v = Vec3::dot(dir, q) * inv_det;
    if (v < -1e-12 || u + v > 1.0 + 1e-12) return std::nullopt;
    const double t = Vec3::dot(e2, q) * inv_det;
    if (t <= kRayEps) return std::nullopt;
    return t;
}

} // namespace detail

// Nearest intersection of a ray with a planar quad (split into two triangles).
inline std::optional<double> ray_quad(const Vec3& origin, const Vec3& dir,
                                      const Facet& f) {
    const auto& v = f.vertices;
    auto t0 = detail::ray_triangle(origin, dir, v[0], v[1], v[2]);
    auto t1 = detail::ray_triangle(origin, dir, v[0], v[2], v[3]);
    if (t0 && t1) return std::min(*t0, *t1);
    return t0 ? t0 : t1;
}

struct Aabb {
    Vec3 lo, hi;

    bool contains(const Vec3& p, double tol = 1e-9) const {
        return p.x >= lo.x - tol && p.x <= hi.x + tol && p.y >= lo.y - tol &&
               p.y <= hi.y + tol && p.z >= lo.z - tol && p.z <= hi.z + tol;
    }
};

// Slab test; returns the entry distance t > kRayEps if the ray hits the box.
inline std::optional<double> ray_aabb(const Vec3& origin, const Vec3& dir,
                                      const Aabb& box) {
    double tmin = -1e300, tmax = 1e300;
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    for (int i = 0; i < 3; ++i) {
        if (std::abs(d[i]) < 1e-15) {
            if (o[i] < lo[i] || o[i] > hi[i]) return std::nullopt;
            continue;
        }
        double t1 = (lo[i] - o[i]) / d[i];
        double t2 = (hi[i] - o[i]) / d[i];
        if (t1 > t2) std::swap(t1, t2);
        if (t1 > tmin) tmin = t1;
        if (t2 < tmax) tmax = t2;
        if (tmin > tmax) return std::nullopt;
    }
    if (tmax <= detail::kRayEps) return std::nullopt;
    return tmin > detail::kRayEps ? tmin : tmax;
}

// Mirror a point across the plane of a facet (image-source construction).
inline Vec3 mirror_across_plane(const Vec3& p, const Facet& f) {
    const Vec3 n = f.normal();
    const double d = Vec3::dot(p - f.vertices[0], n);
    return p - n * (2.0 * d);
}

} // namespace risim
