#pragma once
// Branching-point detector: threshold the darkest pixels, group them into
// connected components, filter by area, and call it a branching point when
// two or more lumen-sized components survive.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "airtopo/error.hpp"
#include "airtopo/image.hpp"

namespace airtopo {

struct DetectorParams {
    double intensity_percentile = 10.0;  // darkest share that seeds the mask
    double area_fraction = 0.01;         // lumen must cover this share of the frame
    int connectivity = 8;                // 4 or 8
    int min_lumens_for_branch = 2;

    void validate() const {
        if (!(intensity_percentile > 0.0) || !(intensity_percentile < 100.0)) {
            throw ValidationError("intensity_percentile must lie in (0, 100)");
        }
        if (!(area_fraction > 0.0) || !(area_fraction < 1.0)) {
            throw ValidationError("area_fraction must lie in (0, 1)");
        }
        if (connectivity != 4 && connectivity != 8) {
            throw ValidationError("connectivity must be 4 or 8");
        }
        if (min_lumens_for_branch < 1) {
            throw ValidationError("min_lumens_for_branch must be >= 1");
        }
    }
};

struct Mask {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;  // 0/1 per pixel

    bool at(int x, int y) const { return data[static_cast<size_t>(y) * width + x] != 0; }
    size_t true_count() const {
        size_t n = 0;
        for (uint8_t v : data) n += v;
        return n;
    }
    bool operator==(const Mask&) const = default;
};

struct ComponentInstance {
    int area = 0;
    int first_pixel = 0;  // smallest row-major index, defines instance order
    int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
};

struct Labeling {
    std::vector<int32_t> labels;  // per pixel, -1 = background
    std::vector<ComponentInstance> instances;
};

struct BranchDetection {
    Mask mask;
    uint8_t threshold = 0;  // intensity percentile value the mask was cut at
    Labeling components;
    double area_threshold = 0.0;
    int lumen_count = 0;
    bool is_branch = false;
};

// Nearest-rank percentile of the pixel intensity multiset.
inline uint8_t darkest_threshold(const GrayImage& gray, double percentile) {
    if (gray.empty()) throw ValidationError("darkest_threshold: empty image");
    std::array<uint64_t, 256> hist{};
    for (uint8_t v : gray.data) ++hist[v];
    const uint64_t n = gray.pixel_count();
    uint64_t rank = static_cast<uint64_t>(std::ceil(percentile / 100.0 * static_cast<double>(n)));
    rank = std::clamp<uint64_t>(rank, 1, n);
    uint64_t cum = 0;
    for (int v = 0; v < 256; ++v) {
        cum += hist[v];
        if (cum >= rank) return static_cast<uint8_t>(v);
    }
    return 255;
}

// Strictly-below-threshold set; a uniform image therefore yields no pixels.
inline Mask darkest_pixel_mask(const GrayImage& gray, double percentile) {
    const uint8_t th = darkest_threshold(gray, percentile);
    Mask mask{gray.width, gray.height, std::vector<uint8_t>(gray.pixel_count(), 0)};
    for (size_t i = 0; i < gray.data.size(); ++i) mask.data[i] = gray.data[i] < th ? 1 : 0;
    return mask;
}

// Flood-fill labeling in row-major scan order, so instance i is the component
// whose smallest pixel index is the i-th smallest overall.
inline Labeling label_components(const Mask& mask, int connectivity) {
    if (connectivity != 4 && connectivity != 8) {
        throw ValidationError("connectivity must be 4 or 8");
    }
    const int w = mask.width, h = mask.height;
    Labeling out;
    out.labels.assign(mask.data.size(), -1);

    static constexpr int dx8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static constexpr int dy8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dx4[4] = {0, -1, 1, 0};
    static constexpr int dy4[4] = {-1, 0, 0, 1};
    const int* dx = connectivity == 8 ? dx8 : dx4;
    const int* dy = connectivity == 8 ? dy8 : dy4;
    const int ndirs = connectivity;

    std::vector<int> stack;
    for (int start = 0; start < w * h; ++start) {
        if (!mask.data[start] || out.labels[start] != -1) continue;
        const int32_t id = static_cast<int32_t>(out.instances.size());
        ComponentInstance inst;
        inst.first_pixel = start;
        inst.min_x = inst.max_x = start % w;
        inst.min_y = inst.max_y = start / w;
        stack.assign(1, start);
        out.labels[start] = id;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int px = p % w, py = p / w;
            ++inst.area;
            inst.min_x = std::min(inst.min_x, px);
            inst.max_x = std::max(inst.max_x, px);
            inst.min_y = std::min(inst.min_y, py);
            inst.max_y = std::max(inst.max_y, py);
            for (int k = 0; k < ndirs; ++k) {
                const int nx = px + dx[k], ny = py + dy[k];
                if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                const int q = ny * w + nx;
                if (mask.data[q] && out.labels[q] == -1) {
                    out.labels[q] = id;
                    stack.push_back(q);
                }
            }
        }
        out.instances.push_back(inst);
    }
    return out;
}

// Number of instances at least as large as area_fraction of the frame.
// The threshold stays real-valued; comparison is >=.
inline int count_lumens(const std::vector<ComponentInstance>& instances, int image_area,
                        double area_fraction) {
    const double th = area_fraction * static_cast<double>(image_area);
    int n = 0;
    for (const auto& inst : instances) {
        if (static_cast<double>(inst.area) >= th) ++n;
    }
    return n;
}

inline BranchDetection detect_branch(const GrayImage& gray, const DetectorParams& params = {}) {
    params.validate();
    if (gray.empty()) throw ValidationError("detect_branch: empty image");
    BranchDetection det;
    det.threshold = darkest_threshold(gray, params.intensity_percentile);
    det.mask = darkest_pixel_mask(gray, params.intensity_percentile);
    det.components = label_components(det.mask, params.connectivity);
    det.area_threshold = params.area_fraction * static_cast<double>(gray.pixel_count());
    det.lumen_count = count_lumens(det.components.instances,
                                   static_cast<int>(gray.pixel_count()), params.area_fraction);
    det.is_branch = det.lumen_count >= params.min_lumens_for_branch;
    return det;
}

}  // namespace airtopo
