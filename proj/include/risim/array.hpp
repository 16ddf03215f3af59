#pragma once

// Uniform planar array geometry, far-field response vectors, the rectangular
// sensing grid, and beamsteering codebooks.
//
// Shared convention: the aperture lies in the local y-z plane with boresight
// +x. Element n = ih + n_h*iv sits at (0, ih*spacing, iv*spacing), i.e.
// row-major with the horizontal index running fastest. A direction (az, ze)
// maps to u = (sin ze cos az, sin ze sin az, cos ze), so a response entry only
// depends on the direction cosines (u_y, u_z).

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "risim/geometry.hpp"

namespace risim {

using Cvec = std::vector<std::complex<double>>;

// RIS phase profile; every entry has unit modulus. All factory functions in
// this module guarantee the invariant by construction.
using InteractionVector = Cvec;

struct UpaGeometry {
    int n_h{1};
    int n_v{1};
    double spacing{0};    // meters
    double wavelength{0}; // meters

    int size() const { return n_h * n_v; }

    Vec3 element_local(int n) const {
        const int ih = n % n_h;
        const int iv = n / n_h;
        return {0.0, ih * spacing, iv * spacing};
    }

    static UpaGeometry half_wavelength(int n_h, int n_v, double wavelength) {
        if (n_h < 1 || n_v < 1 || !(wavelength > 0))
            throw std::invalid_argument("UpaGeometry: bad dimensions or wavelength");
        return {n_h, n_v, wavelength / 2.0, wavelength};
    }

    void validate() const {
        if (n_h < 1 || n_v < 1 || !(spacing > 0) || !(wavelength > 0))
            throw std::invalid_argument("UpaGeometry: bad dimensions or spacing");
    }
};

// Far-field array response a(az, ze); entry n = exp(j k <p_n, u>).
inline Cvec array_response(const UpaGeometry& geom, double azimuth, double zenith) {
    if (!std::isfinite(azimuth) || !std::isfinite(zenith))
        throw std::invalid_argument("array_response: angles must be finite");
    const double k = 2.0 * M_PI / geom.wavelength;
    const double uy = std::sin(zenith) * std::sin(azimuth);
    const double uz = std::cos(zenith);
    Cvec a(static_cast<std::size_t>(geom.size()));
    for (int iv = 0; iv < geom.n_v; ++iv) {
        for (int ih = 0; ih < geom.n_h; ++ih) {
            const double phase = k * geom.spacing * (ih * uy + iv * uz);
            a[static_cast<std::size_t>(ih + geom.n_h * iv)] = std::polar(1.0, phase);
        }
    }
    return a;
}

inline Cvec array_response(const UpaGeometry& geom, const Direction& d) {
    return array_response(geom, d.azimuth, d.zenith);
}

// Rectangular grid of reflected sensing directions; one beam per depth-map
// pixel, flat index m = x + m_h*y.
struct SensingGrid {
    int m_h{0};
    int m_v{0};
    std::vector<Direction> directions;

    int size() const { return m_h * m_v; }
    int flatten(int x, int y) const { return x + m_h * y; }
    std::pair<int, int> unflatten(int m) const { return {m % m_h, m / m_h}; }
    const Direction& at(int x, int y) const {
        return directions[static_cast<std::size_t>(flatten(x, y))];
    }
};

struct FieldOfView {
    double az_min{-M_PI / 4};
    double az_max{M_PI / 4};
    double ze_min{M_PI / 2 - 0.6};
    double ze_max{M_PI / 2 + 0.6};
};

// Uniformly spaced directions (cell centers) over the field of view.
inline SensingGrid sensing_grid(int m_h, int m_v, const FieldOfView& fov) {
    if (m_h < 1 || m_v < 1)
        throw std::invalid_argument("sensing_grid: grid dimensions must be >= 1");
    if (!(fov.az_max > fov.az_min) || !(fov.ze_max > fov.ze_min))
        throw std::invalid_argument("sensing_grid: empty field of view");
    SensingGrid grid;
    grid.m_h = m_h;
    grid.m_v = m_v;
    grid.directions.resize(static_cast<std::size_t>(m_h) * m_v);
    const double daz = (fov.az_max - fov.az_min) / m_h;
    const double dze = (fov.ze_max - fov.ze_min) / m_v;
    for (int y = 0; y < m_v; ++y)
        for (int x = 0; x < m_h; ++x)
            grid.directions[static_cast<std::size_t>(grid.flatten(x, y))] = {
                fov.az_min + (x + 0.5) * daz, fov.ze_min + (y + 0.5) * dze};
    return grid;
}

// Sensing beam for one grid direction: near-field conjugate focusing toward
// the feed composed with far-field steering toward the scene direction,
// entry n = conj(exp(j k |feed - p_n|) a_n(direction)). feed_local is the
// feed position expressed in the aperture's local frame.
inline InteractionVector sensing_beam(const UpaGeometry& geom, const Vec3& feed_local,
                                      const Direction& direction) {
    const double k = 2.0 * M_PI / geom.wavelength;
    Cvec a = array_response(geom, direction);
    InteractionVector psi(a.size());
    for (int n = 0; n < geom.size(); ++n) {
        const double d_feed = (feed_local - geom.element_local(n)).norm();
        psi[static_cast<std::size_t>(n)] =
            std::conj(std::polar(1.0, k * d_feed) * a[static_cast<std::size_t>(n)]);
    }
    return psi;
}

// Complex response of a configured aperture toward one direction, normalized
// so a beam evaluated at its own design direction gives 1:
//   G = (1/N) sum_n psi_n exp(j k |feed - p_n|) a_n(direction)
inline std::complex<double> beam_response(const UpaGeometry& geom, const Vec3& feed_local,
                                          const InteractionVector& psi,
                                          const Direction& direction) {
    const double k = 2.0 * M_PI / geom.wavelength;
    const Cvec a = array_response(geom, direction);
    std::complex<double> acc{0, 0};
    for (int n = 0; n < geom.size(); ++n) {
        const double d_feed = (feed_local - geom.element_local(n)).norm();
        acc += psi[static_cast<std::size_t>(n)] * std::polar(1.0, k * d_feed) *
               a[static_cast<std::size_t>(n)];
    }
    return acc / static_cast<double>(geom.size());
}

// Beamsteering codebook over a uniform direction-cosine grid spanning the
// front half-space. Beam columns are generated on demand (the full-size
// configuration holds 25600 beams of 1600 elements; materializing it would be
// wasteful). Per axis with M points the cosines are -1 + 2i/M, so with M even
// the elementwise product of two codebook beams aliases exactly onto a third.
struct Codebook {
    UpaGeometry geom;
    int m_az{0}; // beams along the horizontal cosine axis
    int m_ze{0}; // beams along the vertical cosine axis
    std::vector<Direction> directions;

    int size() const { return m_az * m_ze; }

    std::pair<double, double> cosines(int m) const {
        const int i = m % m_az;
        const int j = m / m_az;
        return {-1.0 + 2.0 * i / m_az, -1.0 + 2.0 * j / m_ze};
    }

    // conj(a(direction)) evaluated straight from the cosine pair
    InteractionVector beam(int m) const {
        const auto [cy, cz] = cosines(m);
        const double k = 2.0 * M_PI / geom.wavelength;
        InteractionVector psi(static_cast<std::size_t>(geom.size()));
        for (int iv = 0; iv < geom.n_v; ++iv)
            for (int ih = 0; ih < geom.n_h; ++ih)
                psi[static_cast<std::size_t>(ih + geom.n_h * iv)] =
                    std::polar(1.0, -k * geom.spacing * (ih * cy + iv * cz));
        return psi;
    }
};

inline Codebook beamsteering_codebook(const UpaGeometry& geom, int osf_az, int osf_ze) {
    if (osf_az < 1 || osf_ze < 1)
        throw std::invalid_argument("beamsteering_codebook: oversampling factors must be >= 1");
    Codebook cb;
    cb.geom = geom;
    cb.m_az = osf_az * geom.n_h;
    cb.m_ze = osf_ze * geom.n_v;
    cb.directions.resize(static_cast<std::size_t>(cb.size()));
    for (int m = 0; m < cb.size(); ++m) {
        auto [cy, cz] = cb.cosines(m);
        // angle label: clamp into the visible disk for off-disk corners
        double r2 = cy * cy + cz * cz;
        if (r2 > 1.0) {
            const double r = std::sqrt(r2);
            cy /= r;
            cz /= r;
            r2 = 1.0;
        }
        const double ux = std::sqrt(std::max(0.0, 1.0 - r2));
        cb.directions[static_cast<std::size_t>(m)] =
            direction_from_unit(Vec3{ux, cy, cz});
    }
    return cb;
}

// One beam per row, phase in radians per element.
inline void export_codebook_csv(const Codebook& cb, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    char buf[32];
    for (int m = 0; m < cb.size(); ++m) {
        const InteractionVector psi = cb.beam(m);
        for (std::size_t n = 0; n < psi.size(); ++n) {
            std::snprintf(buf, sizeof(buf), "%.17g", std::arg(psi[n]));
            if (n) out << ',';
            out << buf;
        }
        out << '\n';
    }
}

} // namespace risim
