#pragma once

// User detection on depth maps: background subtraction, negative clipping,
// DBSCAN clustering of the positive pixels, and centroid-to-angle mapping.

#include <cmath>
#include <deque>
#include <stdexcept>
#include <utility>
#include <vector>

#include "risim/array.hpp"
#include "risim/imaging.hpp"
#include "risim/json_util.hpp"

namespace risim {

using Pixel = std::pair<int, int>; // (x, y)

// D_bs = background - current, elementwise. The user sits closer than the
// background, so user pixels come out positive; clutter overshoot negative.
inline DepthMap background_subtract(const DepthMap& background, const DepthMap& current) {
    if (!background.same_shape(current))
        throw std::invalid_argument("background_subtract: dimension mismatch");
    DepthMap out = background;
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = background.values[i] - current.values[i];
    return out;
}

// max(value, 0) elementwise; strictly positive values pass through untouched.
inline DepthMap clip_negative(const DepthMap& map) {
    DepthMap out = map;
    for (double& v : out.values)
        if (v < 0.0) v = 0.0;
    return out;
}

// Coordinates of strictly positive entries in row-major order.
inline std::vector<Pixel> positive_pixels(const DepthMap& map) {
    std::vector<Pixel> pts;
    for (int y = 0; y < map.m_v; ++y)
        for (int x = 0; x < map.m_h; ++x)
            if (map.at(x, y) > 0.0) pts.emplace_back(x, y);
    return pts;
}

struct PixelCluster {
    std::vector<Pixel> members;
    int size() const { return static_cast<int>(members.size()); }
};

struct DbscanResult {
    std::vector<PixelCluster> clusters;
    std::vector<Pixel> noise;
    std::vector<int> labels; // per input point: cluster index, or -1 for noise
};

// Classic DBSCAN with Euclidean pixel distance. The eps-neighborhood is the
// closed ball and includes the point itself. Deterministic given input order;
// the first-discovered cluster claims shared border points.
inline DbscanResult dbscan(const std::vector<Pixel>& points, double eps, int min_pts) {
    if (!(eps > 0) || min_pts < 1)
        throw std::invalid_argument("dbscan: need eps > 0 and min_pts >= 1");
    const std::size_t n = points.size();
    const double eps2 = eps * eps;
    auto neighbors = [&](std::size_t i) {
        std::vector<std::size_t> out;
        const double xi = points[i].first, yi = points[i].second;
        for (std::size_t j = 0; j < n; ++j) {
            const double dx = xi - points[j].first;
            const double dy = yi - points[j].second;
            if (dx * dx + dy * dy <= eps2) out.push_back(j);
        }
        return out;
    };

    constexpr int kUnvisited = -2, kNoise = -1;
    DbscanResult res;
    res.labels.assign(n, kUnvisited);
    for (std::size_t i = 0; i < n; ++i) {
        if (res.labels[i] != kUnvisited) continue;
        auto nb = neighbors(i);
        if (static_cast<int>(nb.size()) < min_pts) {
            res.labels[i] = kNoise;
            continue;
        }
        const int cluster = static_cast<int>(res.clusters.size());
        res.clusters.emplace_back();
        res.labels[i] = cluster;
        std::deque<std::size_t> queue(nb.begin(), nb.end());
        while (!queue.empty()) {
            const std::size_t j = queue.front();
            queue.pop_front();
            if (res.labels[j] == kNoise) res.labels[j] = cluster; // border point
            if (res.labels[j] != kUnvisited) continue;
            res.labels[j] = cluster;
            auto nbj = neighbors(j);
            if (static_cast<int>(nbj.size()) >= min_pts)
                queue.insert(queue.end(), nbj.begin(), nbj.end());
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (res.labels[i] < 0) res.noise.push_back(points[i]);
        else res.clusters[static_cast<std::size_t>(res.labels[i])].members.push_back(points[i]);
    }
    return res;
}

struct DetectionResult {
    int x{0};
    int y{0};
    int flat_index{0};
    double azimuth{0};
    double zenith{0};
};

struct UserNotFoundError : std::runtime_error {
    UserNotFoundError() : std::runtime_error("user not found in depth map") {}
};

struct DbscanParams {
    double eps{2.0};
    int min_pts{5};
};

// Positive pixels -> DBSCAN -> largest cluster -> rounded mean coordinate.
// Ties on cluster size go to the cluster containing the smallest flat index;
// the mean rounds half up per axis. Throws UserNotFoundError when no cluster
// survives, so the caller can fall back (and count the failure).
inline DetectionResult detect_user(const DepthMap& clipped, const SensingGrid& grid,
                                   const DbscanParams& params = {}) {
    if (clipped.m_h != grid.m_h || clipped.m_v != grid.m_v)
        throw std::invalid_argument("detect_user: map and grid dimensions differ");
    const std::vector<Pixel> pts = positive_pixels(clipped);
    if (pts.empty()) throw UserNotFoundError();
    const DbscanResult res = dbscan(pts, params.eps, params.min_pts);
    if (res.clusters.empty()) throw UserNotFoundError();

    auto min_flat = [&](const PixelCluster& c) {
        int best = grid.size();
        for (const auto& [x, y] : c.members) best = std::min(best, grid.flatten(x, y));
        return best;
    };
    const PixelCluster* chosen = &res.clusters.front();
    for (const PixelCluster& c : res.clusters) {
        if (c.size() > chosen->size() ||
            (c.size() == chosen->size() && min_flat(c) < min_flat(*chosen)))
            chosen = &c;
    }

    double sx = 0, sy = 0;
    for (const auto& [x, y] : chosen->members) {
        sx += x;
        sy += y;
    }
    DetectionResult det;
    det.x = static_cast<int>(std::floor(sx / chosen->size() + 0.5));
    det.y = static_cast<int>(std::floor(sy / chosen->size() + 0.5));
    det.flat_index = grid.flatten(det.x, det.y);
    const Direction& d = grid.directions[static_cast<std::size_t>(det.flat_index)];
    det.azimuth = d.azimuth;
    det.zenith = d.zenith;
    return det;
}

inline nlohmann::json detection_to_json(const DetectionResult& det) {
    return {{"pixel", {det.x, det.y}},
            {"flat_index", det.flat_index},
            {"azimuth_rad", det.azimuth},
            {"zenith_rad", det.zenith}};
}

inline DetectionResult detection_from_json(const nlohmann::json& j) {
    DetectionResult det;
    const auto& px = jsonu::require(j, "pixel", "detection");
    if (!px.is_array() || px.size() != 2)
        throw ConfigError("'detection.pixel' must be [x, y]");
    det.x = px[0].get<int>();
    det.y = px[1].get<int>();
    det.flat_index = jsonu::get<int>(j, "flat_index", "detection");
    det.azimuth = jsonu::get<double>(j, "azimuth_rad", "detection");
    det.zenith = jsonu::get<double>(j, "zenith_rad", "detection");
    return det;
}

} // namespace risim
