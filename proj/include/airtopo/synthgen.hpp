#pragma once
// Synthetic bronchoscopy-like sequences: bright frames with dark elliptical
// lumens over a walk through the tree, plus ground truth and seeded-noise
// likelihood rows. Dwell frames show a single lumen; the frames approaching
// each node change show two, so the branching-point detector fires exactly on
// the transition windows. The truth label flips at the window midpoint.
//
// Same seed, same inputs -> bit-identical frames, truth and likelihoods.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "airtopo/error.hpp"
#include "airtopo/image.hpp"
#include "airtopo/tree.hpp"

namespace airtopo {

struct EllipseSpec {
    double cx = 0.0, cy = 0.0;  // center, pixels
    double rx = 1.0, ry = 1.0;  // semi-axes, pixels
    uint8_t intensity = 0;
};

// Filled ellipses on a constant background, hard edges, no anti-aliasing.
inline GrayImage render_frame(const std::vector<EllipseSpec>& lumens, uint8_t bg_intensity,
                              int width, int height) {
    GrayImage img(width, height, bg_intensity);
    for (const auto& e : lumens) {
        if (e.rx <= 0 || e.ry <= 0) throw ValidationError("ellipse semi-axes must be positive");
        if (e.cx - e.rx < 0 || e.cx + e.rx > width || e.cy - e.ry < 0 || e.cy + e.ry > height) {
            throw ValidationError("ellipse exceeds frame bounds");
        }
        if (e.intensity >= bg_intensity) {
            throw ValidationError("lumen intensity must be darker than background");
        }
        const int x0 = static_cast<int>(std::floor(e.cx - e.rx));
        const int x1 = static_cast<int>(std::ceil(e.cx + e.rx));
        const int y0 = static_cast<int>(std::floor(e.cy - e.ry));
        const int y1 = static_cast<int>(std::ceil(e.cy + e.ry));
        for (int y = std::max(0, y0); y <= std::min(height - 1, y1); ++y) {
            for (int x = std::max(0, x0); x <= std::min(width - 1, x1); ++x) {
                const double nx = (x + 0.5 - e.cx) / e.rx;
                const double ny = (y + 0.5 - e.cy) / e.ry;
                if (nx * nx + ny * ny <= 1.0) img.at(x, y) = e.intensity;
            }
        }
    }
    return img;
}

struct SyntheticSequence {
    std::vector<GrayImage> frames;
    std::vector<int> truth;                      // node index per frame
    std::vector<bool> branch_frame;              // frames rendered with >= 2 lumens
    std::vector<std::vector<double>> likelihoods;
    std::vector<int> walk;
    uint64_t seed = 0;
};

struct SynthParams {
    int width = 256;
    int height = 256;
    int frames_per_node = 3;        // dwell frames per visited node
    int frames_per_transition = 4;  // multi-lumen frames before each node change
    double noise = 0.0;             // likelihood corruption level in [0, 1)
};

namespace detail {

inline double uniform_real(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(rng() % static_cast<uint64_t>(hi - lo + 1));
}
inline double jitter(std::mt19937_64& rng, double base, double spread) {
    return base + (2.0 * uniform_real(rng) - 1.0) * spread;
}

// Geometry keeps every lumen above the 1% area filter while the total dark
// share stays safely under the 10th-percentile cut, so the detector decision
// depends only on the lumen count.
inline GrayImage render_dwell(std::mt19937_64& rng, const SynthParams& p) {
    const uint8_t bg = static_cast<uint8_t>(uniform_int(rng, 175, 215));
    const uint8_t dark = static_cast<uint8_t>(uniform_int(rng, 8, 48));
    EllipseSpec e;
    e.cx = jitter(rng, p.width * 0.5, p.width * 0.08);
    e.cy = jitter(rng, p.height * 0.5, p.height * 0.08);
    e.rx = jitter(rng, p.width * 0.15, p.width * 0.02);
    e.ry = jitter(rng, p.height * 0.12, p.height * 0.02);
    e.intensity = dark;
    return render_frame({e}, bg, p.width, p.height);
}

inline GrayImage render_branch(std::mt19937_64& rng, const SynthParams& p) {
    const uint8_t bg = static_cast<uint8_t>(uniform_int(rng, 175, 215));
    const uint8_t dark = static_cast<uint8_t>(uniform_int(rng, 8, 48));
    EllipseSpec a, b;
    a.cx = jitter(rng, p.width * 0.30, p.width * 0.03);
    a.cy = jitter(rng, p.height * 0.5, p.height * 0.05);
    a.rx = jitter(rng, p.width * 0.105, p.width * 0.015);
    a.ry = jitter(rng, p.height * 0.085, p.height * 0.012);
    a.intensity = dark;
    b.cx = jitter(rng, p.width * 0.70, p.width * 0.03);
    b.cy = jitter(rng, p.height * 0.5, p.height * 0.05);
    b.rx = jitter(rng, p.width * 0.105, p.width * 0.015);
    b.ry = jitter(rng, p.height * 0.085, p.height * 0.012);
    b.intensity = dark;
    return render_frame({a, b}, bg, p.width, p.height);
}

}  // namespace detail

// Classifier noise stand-in: with probability `noise` the emitted peak sits on
// a random tree neighbor of the true node (the lookalike confusions a frame
// classifier actually makes); the vector is (1-noise)*one-hot + noise*uniform
// around that peak. noise = 0 emits exact one-hots of the truth.
inline std::vector<double> noisy_likelihood_row(std::mt19937_64& rng, const TreeModel& tree,
                                                int truth, double noise) {
    const int n = tree.size();
    int peak = truth;
    if (noise > 0.0 && detail::uniform_real(rng) < noise) {
        const auto& nb = tree.neighbors(truth);
        peak = nb[detail::uniform_int(rng, 0, static_cast<int>(nb.size()) - 1)];
    }
    std::vector<double> row(n, noise / n);
    row[peak] += 1.0 - noise;
    return row;
}

inline SyntheticSequence generate_sequence(const TreeModel& tree, const std::vector<int>& walk,
                                           const SynthParams& params, uint64_t seed) {
    if (walk.empty() || walk.front() != tree.root_index()) {
        throw ValidationError("walk must start at the root");
    }
    for (size_t i = 1; i < walk.size(); ++i) {
        if (node_distance(tree, walk[i - 1], walk[i]) != 1) {
            throw ValidationError("walk must step along tree edges");
        }
    }
    if (params.frames_per_node < 1) throw ValidationError("frames_per_node must be >= 1");
    if (params.frames_per_transition < 1 && walk.size() > 1) {
        throw ValidationError("frames_per_transition must be >= 1 when the walk moves");
    }
    if (params.noise < 0.0 || params.noise >= 1.0) {
        throw ValidationError("noise must lie in [0, 1)");
    }

    std::mt19937_64 rng(seed);
    SyntheticSequence seq;
    seq.walk = walk;
    seq.seed = seed;

    auto emit = [&](int truth, bool branch) {
        seq.frames.push_back(branch ? detail::render_branch(rng, params)
                                    : detail::render_dwell(rng, params));
        seq.truth.push_back(truth);
        seq.branch_frame.push_back(branch);
    };

    for (int f = 0; f < params.frames_per_node; ++f) emit(walk[0], false);
    for (size_t s = 1; s < walk.size(); ++s) {
        const int from = walk[s - 1], to = walk[s];
        const int window = params.frames_per_transition;
        for (int f = 0; f < window; ++f) {
            emit(f < window / 2 ? from : to, true);  // label flips at the midpoint
        }
        for (int f = 0; f < params.frames_per_node; ++f) emit(to, false);
    }
    for (int truth : seq.truth) {
        seq.likelihoods.push_back(noisy_likelihood_row(rng, tree, truth, params.noise));
    }
    return seq;
}

// Seeded random walk from the root, stepping along edges, staying within
// max_depth hops of the root.
inline std::vector<int> random_walk(const TreeModel& tree, std::mt19937_64& rng, int moves,
                                    int max_depth) {
    const auto dist = all_pairs_distances(tree);
    std::vector<int> walk{tree.root_index()};
    for (int i = 0; i < moves; ++i) {
        std::vector<int> options;
        for (int v : tree.neighbors(walk.back())) {
            if (dist[tree.root_index()][v] <= max_depth) options.push_back(v);
        }
        if (options.empty()) break;
        walk.push_back(options[detail::uniform_int(rng, 0, static_cast<int>(options.size()) - 1)]);
    }
    return walk;
}

}  // namespace airtopo
