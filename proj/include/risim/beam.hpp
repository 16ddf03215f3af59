#pragma once

// Communication interaction-vector design from detected angles, similarity
// ranking against a beamsteering codebook, and top-k gain evaluation against
// the equal-gain bound and the exhaustive search.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "risim/array.hpp"
#include "risim/channel.hpp"

namespace risim {

// AP-side beam matched to the LoS path toward the AP: conj(a(theta_AP)).
inline InteractionVector ap_side_beam(const UpaGeometry& geom, const Direction& theta_ap) {
    Cvec a = array_response(geom, theta_ap);
    for (auto& v : a) v = std::conj(v);
    return a;
}

// psi = conj(a(theta_AP) o a(theta_UE)): the Hadamard composition of the
// AP-side and UE-side beams.
inline InteractionVector design_interaction_vector(const UpaGeometry& geom,
                                                   const Direction& theta_ap,
                                                   const Direction& theta_ue) {
    const Cvec a_ap = array_response(geom, theta_ap);
    const Cvec a_ue = array_response(geom, theta_ue);
    InteractionVector psi(a_ap.size());
    for (std::size_t n = 0; n < psi.size(); ++n) psi[n] = std::conj(a_ap[n] * a_ue[n]);
    return psi;
}

// Full codebook ranking by similarity |psi~^H psi_m|, descending; ties break
// toward the lower beam index.
struct BeamRanking {
    std::vector<std::pair<int, double>> entries; // (beam index, similarity)
};

inline BeamRanking rank_beams(const InteractionVector& psi_tilde, const Codebook& cb) {
    if (static_cast<int>(psi_tilde.size()) != cb.geom.size())
        throw std::invalid_argument("rank_beams: interaction vector does not match codebook");
    BeamRanking ranking;
    ranking.entries.reserve(static_cast<std::size_t>(cb.size()));
    for (int m = 0; m < cb.size(); ++m) {
        const InteractionVector psi = cb.beam(m);
        std::complex<double> acc{0, 0};
        for (std::size_t n = 0; n < psi.size(); ++n)
            acc += std::conj(psi_tilde[n]) * psi[n];
        ranking.entries.emplace_back(m, std::abs(acc));
    }
    std::sort(ranking.entries.begin(), ranking.entries.end(),
              [](const auto& a, const auto& b) {
                  return a.second > b.second || (a.second == b.second && a.first < b.first);
              });
    return ranking;
}

struct SearchResult {
    int index{0};
    double gain{0}; // |(h_r o h_t)^T psi|
};

// Beam sweeping over the whole codebook; ties go to the lowest index.
inline SearchResult exhaustive_search(const ChannelVector& h_t, const ChannelVector& h_r,
                                      const Codebook& cb) {
    const ChannelVector h = composite_channel(h_t, h_r);
    SearchResult best{0, -1.0};
    for (int m = 0; m < cb.size(); ++m) {
        const double g = std::abs(beamformed_sum(h, cb.beam(m)));
        if (g > best.gain) best = {m, g};
    }
    return best;
}

// Gains are amplitude ratios to the equal-gain bound sum |h_n|; the dB value
// is the power ratio 20 log10(ratio), matching a normalized-gain plot axis.
struct GainReport {
    struct Entry {
        int k{0};
        double gain_ratio{0};     // in [0, 1]
        double gain_db{0};
        double overhead_ratio{0}; // k / codebook size
    };
    std::vector<Entry> entries;
    int exhaustive_index{0};
    double exhaustive_ratio{0};
    double exhaustive_db{0};
};

inline double ratio_to_db(double ratio) {
    return 20.0 * std::log10(ratio);
}

// Best achieved gain among the top-k ranked beams for each requested k,
// normalized by the equal-gain bound of the true composite channel.
inline GainReport evaluate_topk(const ChannelVector& h_t, const ChannelVector& h_r,
                                const BeamRanking& ranking, const Codebook& cb,
                                const std::vector<int>& k_list) {
    const ChannelVector h = composite_channel(h_t, h_r);
    const double raw_bound = equal_gain_bound(h);
    const double bound = raw_bound > 0.0 ? raw_bound : 1.0; // all-zero channel -> ratios 0
    int k_max = 0;
    for (int k : k_list) {
        if (k < 1 || k > cb.size())
            throw std::invalid_argument("evaluate_topk: k out of range");
        k_max = std::max(k_max, k);
    }

    std::vector<double> best_after(static_cast<std::size_t>(k_max) + 1, 0.0);
    double running = 0.0;
    for (int i = 0; i < k_max; ++i) {
        const int m = ranking.entries[static_cast<std::size_t>(i)].first;
        running = std::max(running, std::abs(beamformed_sum(h, cb.beam(m))));
        best_after[static_cast<std::size_t>(i) + 1] = running;
    }

    GainReport report;
    for (int k : k_list) {
        const double ratio = best_after[static_cast<std::size_t>(k)] / bound;
        report.entries.push_back(
            {k, ratio, ratio_to_db(ratio), static_cast<double>(k) / cb.size()});
    }
    const SearchResult ex = exhaustive_search(h_t, h_r, cb);
    report.exhaustive_index = ex.index;
    report.exhaustive_ratio = ex.gain / bound;
    report.exhaustive_db = ratio_to_db(report.exhaustive_ratio);
    return report;
}

inline void write_gain_csv(const GainReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "k,normalized_gain_db,overhead_ratio,exhaustive_gain_db\n";
    char buf[96];
    for (const auto& e : report.entries) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", e.k, e.gain_db,
                      e.overhead_ratio, report.exhaustive_db);
        out << buf;
    }
}

} // namespace risim
