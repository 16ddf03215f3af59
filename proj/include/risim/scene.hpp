#pragma once

// Synthetic 3D environment and single-bounce path synthesis. This stands in
// for an external ray tracer: every channel path in the simulator originates
// here, either as feed->RIS->target backscatter or as RIS<->endpoint
// communication paths.

#include <complex>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "risim/geometry.hpp"
#include "risim/json_util.hpp"

namespace risim {

// Person stand-in: an axis-aligned box on the floor. footprint_center is the
// center of the base; width spans x, depth spans y, height rises along +z.
struct UserModel {
    Vec3 footprint_center;
    double height{1.8};
    double width{0.5};
    double depth{0.3};
    double body_reflectivity{0.6};
    Vec3 antenna_offset; // UE antenna position relative to footprint_center

    Aabb box() const {
        const Vec3 c = footprint_center;
        return {{c.x - width / 2, c.y - depth / 2, c.z},
                {c.x + width / 2, c.y + depth / 2, c.z + height}};
    }
    Vec3 antenna_position() const { return footprint_center + antenna_offset; }

    void validate() const {
        if (!(height > 0) || !(width > 0) || !(depth > 0))
            throw std::invalid_argument("UserModel: body dimensions must be positive");
        if (!(body_reflectivity >= 0 && body_reflectivity <= 1))
            throw std::invalid_argument("UserModel: body_reflectivity must be in [0, 1]");
        if (!box().contains(antenna_position()))
            throw std::invalid_argument("UserModel: antenna must lie inside or on the body box");
    }
};

struct Scene {
    std::vector<Facet> facets;
    Vec3 ap_position;
    Vec3 ris_center;
    Frame ris_orientation;
    Vec3 feed_position;
    std::optional<UserModel> user;
    double max_depth{10.0};

    double feed_distance() const { return (feed_position - ris_center).norm(); }

    Scene without_user() const {
        Scene s = *this;
        s.user.reset();
        return s;
    }

    void validate() const {
        ris_orientation.validate();
        for (const auto& f : facets) f.validate();
        if (feed_distance() > 1.0)
            throw std::invalid_argument("Scene: feed must be within 1 m of ris_center");
        if (!(max_depth > 0))
            throw std::invalid_argument("Scene: max_depth must be positive");
        if (user) user->validate();
    }
};

struct Hit {
    double distance{0};
    Vec3 point;
    double reflectivity{0};
};

namespace detail {

struct HitRecord {
    double distance;
    double reflectivity;
    int facet_index; // -1 for the user body
};

inline std::optional<HitRecord> nearest_hit(const Scene& scene, const Vec3& origin,
                                            const Vec3& dir) {
    std::optional<HitRecord> best;
    for (std::size_t i = 0; i < scene.facets.size(); ++i) {
        if (auto t = ray_quad(origin, dir, scene.facets[i])) {
            if (!best || *t < best->distance)
                best = HitRecord{*t, scene.facets[i].reflectivity, static_cast<int>(i)};
        }
    }
    if (scene.user) {
        if (auto t = ray_aabb(origin, dir, scene.user->box())) {
            if (!best || *t < best->distance)
                best = HitRecord{*t, scene.user->body_reflectivity, -1};
        }
    }
    if (best && best->distance > scene.max_depth) return std::nullopt;
    return best;
}

} // namespace detail

// Nearest intersection with any facet or user-body face strictly in front of
// the origin. Directions that reach nothing within max_depth return nothing.
inline std::optional<Hit> ray_cast(const Scene& scene, const Vec3& origin,
                                   const Vec3& direction) {
    auto rec = detail::nearest_hit(scene, origin, direction);
    if (!rec) return std::nullopt;
    return Hit{rec->distance, origin + direction * rec->distance, rec->reflectivity};
}

// One propagation path. total_distance is the full TX->...->RX distance; the
// angles are azimuth/zenith at the RIS in its local frame.
struct Path {
    double total_distance{0};
    std::complex<double> gain{0, 0};
    double azimuth{0};
    double zenith{0};
};

using PathSet = std::vector<Path>;

// Knobs of the path synthesizer. clutter_pairs lists (first, second) facet
// indices; for each pair a double-bounce path is appended whenever the beam
// ray hits `first` and its mirror reflection then hits `second`. clutter_gain
// scales those paths so they can dominate the direct backscatter, reproducing
// depth overshoot from undesired reflections.
struct PathConfig {
    double wavelength{0.005};
    double a_ref{1.0}; // reference amplitude of the 1/(d1*d2)^2 backscatter law
    std::vector<std::pair<int, int>> clutter_pairs;
    double clutter_gain{10.0};
};

namespace detail {

inline std::complex<double> gain_with_phase(double amplitude, double total_distance,
                                            double wavelength) {
    const double phase =
        -2.0 * M_PI * std::fmod(total_distance / wavelength, 1.0); // mod 2pi
    return std::polar(amplitude, phase);
}

} // namespace detail

// Single-backscatter path for one sensing beam direction (plus optional
// double-bounce clutter). The feed illuminates the RIS, the RIS reflects along
// `direction`, and the return retraces the same route, so the round-trip
// distance is 2 (d_feed + d_hit).
inline PathSet backscatter_paths(const Scene& scene, const PathConfig& cfg,
                                 const Direction& direction) {
    PathSet paths;
    const Vec3 dir_world = scene.ris_orientation.to_world(unit_from_direction(direction));
    const double d_feed = scene.feed_distance();

    auto rec = detail::nearest_hit(scene, scene.ris_center, dir_world);
    if (rec) {
        const double amp =
            std::sqrt(rec->reflectivity) * cfg.a_ref / std::pow(d_feed * rec->distance, 2);
        if (amp > 0.0) {
            const double total = 2.0 * (d_feed + rec->distance);
            paths.push_back({total, detail::gain_with_phase(amp, total, cfg.wavelength),
                             direction.azimuth, direction.zenith});
        }

        for (const auto& [first, second] : cfg.clutter_pairs) {
            if (rec->facet_index != first) continue;
            const Vec3 p1 = scene.ris_center + dir_world * rec->distance;
            const Vec3 n = scene.facets[first].normal();
            const Vec3 reflected = dir_world - n * (2.0 * Vec3::dot(dir_world, n));
            auto rec2 = detail::nearest_hit(scene, p1, reflected);
            if (!rec2 || rec2->facet_index != second) continue;
            const double leg = rec->distance + rec2->distance;
            const double amp2 = cfg.clutter_gain *
                                std::sqrt(rec->reflectivity * rec2->reflectivity) *
                                cfg.a_ref / std::pow(d_feed * leg, 2);
            if (amp2 <= 0.0) continue;
            const double total2 = 2.0 * (d_feed + leg);
            paths.push_back({total2, detail::gain_with_phase(amp2, total2, cfg.wavelength),
                             direction.azimuth, direction.zenith});
        }
    }
    return paths;
}

namespace detail {

inline bool segment_blocked(const Scene& scene, const Vec3& from, const Vec3& to) {
    const Vec3 d = to - from;
    const double len = d.norm();
    if (len <= kRayEps) return false;
    auto rec = nearest_hit(scene, from, d / len);
    return rec && rec->distance < len - 1e-9;
}

} // namespace detail

// LoS path plus single-bounce facet reflections between the RIS and an
// endpoint (AP or UE antenna), via image sources. Each path carries its
// arrival angles at the RIS. Amplitudes follow a 1/distance spreading law,
// scaled by sqrt(reflectivity) per bounce.
inline PathSet comm_paths(const Scene& scene, const PathConfig& cfg,
                          const Vec3& endpoint) {
    PathSet paths;
    const Vec3 ris = scene.ris_center;

    auto append = [&](const Vec3& first_leg_dir, double distance, double amplitude) {
        const Direction d =
            direction_from_unit(scene.ris_orientation.to_local(first_leg_dir));
        paths.push_back({distance, detail::gain_with_phase(amplitude, distance, cfg.wavelength),
                         d.azimuth, d.zenith});
    };

    // LoS
    if (!detail::segment_blocked(scene, ris, endpoint)) {
        const double d = (endpoint - ris).norm();
        if (d > detail::kRayEps) append((endpoint - ris) / d, d, cfg.a_ref / d);
    }

    // Image source per facet
    for (const auto& facet : scene.facets) {
        if (facet.reflectivity <= 0.0) continue;
        const Vec3 image = mirror_across_plane(endpoint, facet);
        const Vec3 to_image = image - ris;
        const double d_total = to_image.norm();
        if (d_total <= detail::kRayEps) continue;
        const Vec3 dir = to_image / d_total;
        auto t = ray_quad(ris, dir, facet);
        if (!t || *t >= d_total - 1e-9) continue; // reflection point must precede the image
        const Vec3 p = ris + dir * (*t);
        // both legs must be clear; the facet itself is touched at p exactly,
        // never strictly before, so no self-exclusion is needed
        if (detail::segment_blocked(scene, ris, p)) continue;
        if (detail::segment_blocked(scene, p, endpoint)) continue;
        append(dir, d_total, std::sqrt(facet.reflectivity) * cfg.a_ref / d_total);
    }
    return paths;
}

// ---- scene file I/O -------------------------------------------------------

inline Scene scene_from_json(const nlohmann::json& j) {
    Scene s;
    const auto& facets = jsonu::require(j, "facets", "scene");
    if (!facets.is_array()) throw ConfigError("'scene.facets' must be an array");
    for (std::size_t i = 0; i < facets.size(); ++i) {
        const std::string ctx = "scene.facets[" + std::to_string(i) + "]";
        const auto& fj = facets[i];
        const auto& verts = jsonu::require(fj, "vertices", ctx);
        if (!verts.is_array() || verts.size() != 4)
            throw ConfigError("'" + ctx + ".vertices' must hold 4 points");
        Facet f;
        for (int k = 0; k < 4; ++k)
            f.vertices[k] = jsonu::parse_vec3(verts[k], ctx + ".vertices");
        f.reflectivity = jsonu::get<double>(fj, "reflectivity", ctx);
        s.facets.push_back(f);
    }
    s.ap_position = jsonu::get_vec3(j, "ap", "scene");
    s.ris_center = jsonu::get_vec3(j, "ris_center", "scene");
    const auto& fr = jsonu::require(j, "ris_orientation", "scene");
    s.ris_orientation.boresight = jsonu::get_vec3(fr, "boresight", "scene.ris_orientation");
    s.ris_orientation.horizontal = jsonu::get_vec3(fr, "horizontal", "scene.ris_orientation");
    s.ris_orientation.vertical = jsonu::get_vec3(fr, "vertical", "scene.ris_orientation");
    s.feed_position = jsonu::get_vec3(j, "feed", "scene");
    s.max_depth = jsonu::get<double>(j, "max_depth", "scene");
    if (j.contains("user") && !j.at("user").is_null()) {
        const auto& uj = j.at("user");
        UserModel u;
        u.footprint_center = jsonu::get_vec3(uj, "footprint_center", "scene.user");
        u.height = jsonu::get<double>(uj, "height", "scene.user");
        u.width = jsonu::get<double>(uj, "width", "scene.user");
        u.depth = jsonu::get<double>(uj, "depth", "scene.user");
        u.body_reflectivity = jsonu::get<double>(uj, "body_reflectivity", "scene.user");
        u.antenna_offset = jsonu::get_vec3(uj, "antenna_offset", "scene.user");
        s.user = u;
    }
    s.validate();
    return s;
}

inline Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("invalid JSON in scene file " + path + ": " + e.what());
    }
    return scene_from_json(j);
}

} // namespace risim
