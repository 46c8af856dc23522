#pragma once
// Intensity quantization: 1-D k-means over the pixel histogram.
//
// Lloyd iterations run first, from deterministic quantile initialization
// (centroid r starts at the (2r+1)/(2k) nearest-rank quantile). Plain Lloyd
// can stall in a local optimum on sparse histograms, so the result is then
// checked against the exact dynamic program over contiguous value segments,
// which is cheap at <=256 distinct intensities and globally optimal; the
// better clustering wins. Everything is deterministic.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "airtopo/error.hpp"
#include "airtopo/image.hpp"

namespace airtopo {

struct QuantizedImage {
    GrayImage image;             // every pixel equals one of `levels`
    std::vector<uint8_t> levels; // effective quantization levels, ascending
};

struct IntensityClustering {
    std::vector<double> centroids;          // ascending, non-empty clusters only
    std::array<int16_t, 256> cluster_of{};  // intensity -> centroid index, -1 if absent
    std::vector<double> objective_history;  // SSE after each Lloyd iteration + final value
    double objective = 0.0;
    int lloyd_iterations = 0;
    bool dp_refined = false;  // exact DP found a strictly better clustering than Lloyd

    int effective_levels() const { return static_cast<int>(centroids.size()); }
};

namespace detail {

struct ValueHistogram {
    std::vector<int> values;      // present intensities, ascending
    std::vector<uint64_t> counts; // per value
    uint64_t total = 0;
};

inline ValueHistogram collapse_histogram(const std::array<uint64_t, 256>& hist) {
    ValueHistogram vh;
    for (int v = 0; v < 256; ++v) {
        if (hist[v] > 0) {
            vh.values.push_back(v);
            vh.counts.push_back(hist[v]);
            vh.total += hist[v];
        }
    }
    return vh;
}

inline double weighted_sse(const ValueHistogram& vh, const std::vector<double>& centroids,
                           const std::vector<int>& assign) {
    double sse = 0.0;
    for (size_t i = 0; i < vh.values.size(); ++i) {
        const double d = vh.values[i] - centroids[assign[i]];
        sse += static_cast<double>(vh.counts[i]) * d * d;
    }
    return sse;
}

// Exact optimal contiguous partition of the value histogram into `k` segments,
// minimizing weighted SSE. Segment costs use 128-bit integer numerators, so
// the objective is exact up to one final division per segment.
inline void optimal_partition(const ValueHistogram& vh, int k, std::vector<double>* centroids,
                              std::vector<int>* assign, double* sse) {
    const int d = static_cast<int>(vh.values.size());
    std::vector<int64_t> pw(d + 1, 0), ps(d + 1, 0), pss(d + 1, 0);
    for (int i = 0; i < d; ++i) {
        const int64_t c = static_cast<int64_t>(vh.counts[i]);
        const int64_t v = vh.values[i];
        pw[i + 1] = pw[i] + c;
        ps[i + 1] = ps[i] + c * v;
        pss[i + 1] = pss[i] + c * v * v;
    }
    auto cost = [&](int i, int j) {  // [i, j)
        const int64_t w = pw[j] - pw[i];
        const __int128 s = ps[j] - ps[i];
        const __int128 ss = pss[j] - pss[i];
        const __int128 num = ss * w - s * s;
        return static_cast<double>(num) / static_cast<double>(w);
    };

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> dp(k + 1, std::vector<double>(d + 1, inf));
    std::vector<std::vector<int>> from(k + 1, std::vector<int>(d + 1, -1));
    dp[0][0] = 0.0;
    for (int m = 1; m <= k; ++m) {
        for (int j = m; j <= d; ++j) {
            for (int i = m - 1; i < j; ++i) {
                const double t = dp[m - 1][i] + cost(i, j);
                if (t < dp[m][j]) {
                    dp[m][j] = t;
                    from[m][j] = i;
                }
            }
        }
    }
    *sse = dp[k][d];
    std::vector<std::pair<int, int>> segments;
    for (int m = k, j = d; m > 0; --m) {
        const int i = from[m][j];
        segments.emplace_back(i, j);
        j = i;
    }
    std::reverse(segments.begin(), segments.end());
    centroids->clear();
    assign->assign(d, 0);
    for (size_t s = 0; s < segments.size(); ++s) {
        const auto [i, j] = segments[s];
        centroids->push_back(static_cast<double>(ps[j] - ps[i]) /
                             static_cast<double>(pw[j] - pw[i]));
        for (int t = i; t < j; ++t) (*assign)[t] = static_cast<int>(s);
    }
}

}  // namespace detail

inline IntensityClustering cluster_intensities(const std::array<uint64_t, 256>& hist, int k,
                                               int max_iter = 50, double tol = 0.5) {
    if (k < 1) throw ValidationError("k must be >= 1");
    const auto vh = detail::collapse_histogram(hist);
    const int d = static_cast<int>(vh.values.size());
    if (d == 0) throw ValidationError("cannot quantize an empty image");

    IntensityClustering out;
    out.cluster_of.fill(-1);

    if (d <= k) {
        // One cluster per distinct value: exact fit, nothing to iterate.
        for (int i = 0; i < d; ++i) {
            out.centroids.push_back(vh.values[i]);
            out.cluster_of[vh.values[i]] = static_cast<int16_t>(i);
        }
        out.objective = 0.0;
        out.objective_history = {0.0};
        return out;
    }

    // Deterministic init: nearest-rank quantiles of the intensity multiset.
    std::vector<double> centroids;
    {
        std::vector<uint64_t> cum(d);
        uint64_t running = 0;
        for (int i = 0; i < d; ++i) {
            running += vh.counts[i];
            cum[i] = running;
        }
        for (int r = 0; r < k; ++r) {
            const double q = (2.0 * r + 1.0) / (2.0 * k);
            const uint64_t rank =
                std::max<uint64_t>(1, static_cast<uint64_t>(std::ceil(q * vh.total)));
            int idx = 0;
            while (cum[idx] < rank) ++idx;
            centroids.push_back(vh.values[idx]);
        }
    }

    std::vector<int> assign(d, 0);
    auto assign_values = [&]() {
        for (int i = 0; i < d; ++i) {
            int best = 0;
            double best_d = std::abs(vh.values[i] - centroids[0]);
            for (size_t c = 1; c < centroids.size(); ++c) {
                const double dist = std::abs(vh.values[i] - centroids[c]);
                if (dist < best_d) {  // ties keep the lower index
                    best_d = dist;
                    best = static_cast<int>(c);
                }
            }
            assign[i] = best;
        }
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        assign_values();
        std::vector<double> sums(centroids.size(), 0.0);
        std::vector<uint64_t> weights(centroids.size(), 0);
        for (int i = 0; i < d; ++i) {
            sums[assign[i]] += static_cast<double>(vh.counts[i]) * vh.values[i];
            weights[assign[i]] += vh.counts[i];
        }
        std::vector<double> updated;
        double movement = 0.0;
        bool dropped = false;
        for (size_t c = 0; c < centroids.size(); ++c) {
            if (weights[c] == 0) {
                dropped = true;  // starved cluster, drop it
                continue;
            }
            const double mean = sums[c] / static_cast<double>(weights[c]);
            movement = std::max(movement, std::abs(mean - centroids[c]));
            updated.push_back(mean);
        }
        centroids = std::move(updated);
        assign_values();
        out.objective_history.push_back(detail::weighted_sse(vh, centroids, assign));
        out.lloyd_iterations = iter + 1;
        if (!dropped && movement < tol) break;
    }
    double lloyd_sse = out.objective_history.back();

    // Exact refinement: global optimum over contiguous segments.
    std::vector<double> dp_centroids;
    std::vector<int> dp_assign;
    double dp_sse = 0.0;
    detail::optimal_partition(vh, std::min(k, d), &dp_centroids, &dp_assign, &dp_sse);
    if (dp_sse < lloyd_sse - 1e-9 * std::max(1.0, lloyd_sse)) {
        centroids = std::move(dp_centroids);
        assign = std::move(dp_assign);
        out.dp_refined = true;
        out.objective = dp_sse;
    } else {
        out.objective = lloyd_sse;
    }
    out.objective_history.push_back(out.objective);

    // Centroids ascend already (contiguous segments / ordered Lloyd fixed point);
    // sort defensively and remap in case of exact centroid collisions.
    std::vector<int> order(centroids.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return centroids[a] < centroids[b]; });
    std::vector<int> rank_of(order.size());
    std::vector<double> sorted;
    for (size_t i = 0; i < order.size(); ++i) {
        rank_of[order[i]] = static_cast<int>(i);
        sorted.push_back(centroids[order[i]]);
    }
    out.centroids = std::move(sorted);
    for (int i = 0; i < d; ++i) {
        out.cluster_of[vh.values[i]] = static_cast<int16_t>(rank_of[assign[i]]);
    }
    return out;
}

inline std::array<uint64_t, 256> intensity_histogram(const GrayImage& img) {
    std::array<uint64_t, 256> hist{};
    for (uint8_t v : img.data) ++hist[v];
    return hist;
}

// Replaces every pixel with its cluster centroid, rounded half up.
inline QuantizedImage quantize_levels(const GrayImage& gray, int k = 5, int max_iter = 50,
                                      double tol = 0.5) {
    if (gray.empty()) throw ValidationError("quantize_levels: empty image");
    const auto clustering = cluster_intensities(intensity_histogram(gray), k, max_iter, tol);

    std::array<uint8_t, 256> lut{};
    std::vector<uint8_t> rounded;
    for (double c : clustering.centroids) {
        rounded.push_back(static_cast<uint8_t>(std::min(255.0, std::floor(c + 0.5))));
    }
    for (int v = 0; v < 256; ++v) {
        if (clustering.cluster_of[v] >= 0) lut[v] = rounded[clustering.cluster_of[v]];
    }

    QuantizedImage out;
    out.image = GrayImage(gray.width, gray.height);
    for (size_t i = 0; i < gray.data.size(); ++i) out.image.data[i] = lut[gray.data[i]];

    std::vector<uint8_t> levels(rounded);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    out.levels = std::move(levels);
    return out;
}

}  // namespace airtopo
