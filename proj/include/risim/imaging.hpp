#pragma once

// Depth-map estimation: per-beam range extraction from the sensing cube into
// a pixel grid, plus PGM/CSV export of the result.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "risim/array.hpp"
#include "risim/dft.hpp"
#include "risim/fmcw.hpp"

namespace risim {

// M_v x M_h grid of estimated one-way depths in meters; pixel (x, y) is the
// beam with flat index x + m_h*y. Values are unconstrained so the same
// container can hold signed background-subtracted maps.
struct DepthMap {
    int m_h{0};
    int m_v{0};
    std::vector<double> values;

    static DepthMap filled(int m_h, int m_v, double value) {
        return {m_h, m_v, std::vector<double>(static_cast<std::size_t>(m_h) * m_v, value)};
    }
    double& at(int x, int y) { return values[static_cast<std::size_t>(x + m_h * y)]; }
    double at(int x, int y) const { return values[static_cast<std::size_t>(x + m_h * y)]; }
    int size() const { return m_h * m_v; }
    bool same_shape(const DepthMap& o) const { return m_h == o.m_h && m_v == o.m_v; }
};

struct ImagingConfig {
    int pad_factor{8};      // zero-padding factor of the range DFT
    double threshold{4.0};  // peak acceptance: |peak| > threshold * median magnitude

    void validate() const {
        if (pad_factor < 1 || !(threshold >= 0))
            throw std::invalid_argument("ImagingConfig: bad pad_factor or threshold");
    }
};

// Per column: zero-padded DFT, magnitude peak above threshold * median gives
// the beat frequency, hence the round-trip delay. Reported depth is the
// one-way RIS->target distance: total/2 minus the feed leg. Columns with no
// accepted peak get the max_depth sentinel.
inline DepthMap estimate_depth_map(const SensingCube& cube, const ChirpConfig& cfg,
                                   const ImagingConfig& img, double feed_distance,
                                   double max_depth, const SensingGrid& grid) {
    img.validate();
    if (cube.m_sample != cfg.m_sample)
        throw std::invalid_argument("estimate_depth_map: cube rows do not match chirp config");
    if (cube.m_s != grid.size())
        throw std::invalid_argument("estimate_depth_map: cube columns do not match grid");

    DepthMap map = DepthMap::filled(grid.m_h, grid.m_v, max_depth);
    std::vector<double> mags;
    for (int m = 0; m < cube.m_s; ++m) {
        const auto col = cube.column(m);
        const Cvec padded = dft_zero_padded(Cvec(col.begin(), col.end()),
                                            static_cast<std::size_t>(img.pad_factor) *
                                                static_cast<std::size_t>(cfg.m_sample));
        const std::size_t p = padded.size();
        // beat tones sit in [0, f_s/2); search the non-negative half
        const std::size_t half = p / 2;
        std::size_t peak_bin = 0;
        double peak = 0.0;
        mags.assign(half + 1, 0.0);
        for (std::size_t k = 0; k <= half; ++k) {
            const double mag = std::abs(padded[k]);
            mags[k] = mag;
            if (mag > peak) {
                peak = mag;
                peak_bin = k;
            }
        }
        std::nth_element(mags.begin(), mags.begin() + static_cast<long>(mags.size() / 2),
                         mags.end());
        const double median = mags[mags.size() / 2];
        if (!(peak > img.threshold * median) || peak <= 0.0) continue; // sentinel stays

        const double f_hat = static_cast<double>(peak_bin) * cfg.f_s / static_cast<double>(p);
        const double total_distance = kSpeedOfLight * f_hat / cfg.slope;
        double depth = total_distance / 2.0 - feed_distance;
        depth = std::clamp(depth, 0.0, max_depth);
        map.values[static_cast<std::size_t>(m)] = depth;
    }
    return map;
}

// ---- depth-map export -------------------------------------------------------

// Row-major CSV in meters, one row of the grid per line.
inline void write_depth_csv(const DepthMap& map, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    char buf[32];
    for (int y = 0; y < map.m_v; ++y) {
        for (int x = 0; x < map.m_h; ++x) {
            std::snprintf(buf, sizeof(buf), "%.17g", map.at(x, y));
            if (x) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

inline DepthMap read_depth_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open depth CSV: " + path);
    DepthMap map;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        int count = 0;
        while (std::getline(row, cell, ',')) {
            map.values.push_back(std::stod(cell));
            ++count;
        }
        if (map.m_h == 0) map.m_h = count;
        else if (count != map.m_h)
            throw std::runtime_error("ragged depth CSV: " + path);
        ++map.m_v;
    }
    return map;
}

// 16-bit binary PGM; depth maps linearly to [0, 65535] over [0, max_depth],
// row y = 0 written first.
inline void write_depth_pgm(const DepthMap& map, double max_depth, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P5\n" << map.m_h << " " << map.m_v << "\n65535\n";
    for (int y = 0; y < map.m_v; ++y)
        for (int x = 0; x < map.m_h; ++x) {
            double t = map.at(x, y) / max_depth;
            t = std::clamp(t, 0.0, 1.0);
            const unsigned v = static_cast<unsigned>(t * 65535.0 + 0.5);
            const unsigned char hi = static_cast<unsigned char>(v >> 8);
            const unsigned char lo = static_cast<unsigned char>(v & 0xff);
            out.put(static_cast<char>(hi));
            out.put(static_cast<char>(lo));
        }
}

} // namespace risim
