#pragma once
// Raster value types and the RGB -> grayscale conversion feeding the
// rest of the pipeline. Pixels are 8-bit, stored row-major.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "airtopo/error.hpp"

namespace airtopo {

struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;  // row-major, width*height entries

    GrayImage() = default;
    GrayImage(int w, int h, uint8_t fill = 0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {
        if (w <= 0 || h <= 0) throw ValidationError("image dimensions must be positive");
    }

    uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t pixel_count() const { return data.size(); }
    bool empty() const { return data.empty(); }

    bool operator==(const GrayImage&) const = default;
};

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> data;  // row-major, 3 bytes per pixel

    RgbImage() = default;
    RgbImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {
        if (w <= 0 || h <= 0) throw ValidationError("image dimensions must be positive");
    }

    uint8_t* px(int x, int y) { return data.data() + (static_cast<size_t>(y) * width + x) * 3; }
    const uint8_t* px(int x, int y) const {
        return data.data() + (static_cast<size_t>(y) * width + x) * 3;
    }
};

// ITU-R BT.601 luma, rounded half up.
inline GrayImage to_grayscale(const RgbImage& rgb) {
    if (rgb.width <= 0 || rgb.height <= 0 || rgb.data.empty()) {
        throw ValidationError("to_grayscale: empty image");
    }
    GrayImage out(rgb.width, rgb.height);
    const size_t n = out.pixel_count();
    for (size_t i = 0; i < n; ++i) {
        const uint8_t* p = rgb.data.data() + i * 3;
        double luma = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
        int v = static_cast<int>(std::floor(luma + 0.5));
        out.data[i] = static_cast<uint8_t>(v > 255 ? 255 : v);
    }
    return out;
}

// Box-filter downsampling with exact fractional pixel coverage. Every source
// pixel contributes to the output cells it overlaps, weighted by overlap area,
// so the result is independent of how the grid lines cut the source.
inline std::vector<double> area_average_resize(const GrayImage& img, int out_w, int out_h) {
    if (img.empty()) throw ValidationError("area_average_resize: empty image");
    if (out_w <= 0 || out_h <= 0) throw ValidationError("area_average_resize: bad output size");

    std::vector<double> sum(static_cast<size_t>(out_w) * out_h, 0.0);
    std::vector<double> weight(sum.size(), 0.0);
    const double sx = static_cast<double>(out_w) / img.width;
    const double sy = static_cast<double>(out_h) / img.height;

    for (int y = 0; y < img.height; ++y) {
        const double y0 = y * sy, y1 = (y + 1) * sy;
        const int cy0 = static_cast<int>(y0);
        const int cy1 = std::min(out_h - 1, static_cast<int>(std::ceil(y1)) - 1);
        for (int x = 0; x < img.width; ++x) {
            const double x0 = x * sx, x1 = (x + 1) * sx;
            const int cx0 = static_cast<int>(x0);
            const int cx1 = std::min(out_w - 1, static_cast<int>(std::ceil(x1)) - 1);
            const double v = img.at(x, y);
            for (int cy = cy0; cy <= cy1; ++cy) {
                const double oy = std::min<double>(y1, cy + 1) - std::max<double>(y0, cy);
                if (oy <= 0) continue;
                for (int cx = cx0; cx <= cx1; ++cx) {
                    const double ox = std::min<double>(x1, cx + 1) - std::max<double>(x0, cx);
                    if (ox <= 0) continue;
                    const size_t idx = static_cast<size_t>(cy) * out_w + cx;
                    sum[idx] += v * ox * oy;
                    weight[idx] += ox * oy;
                }
            }
        }
    }
    for (size_t i = 0; i < sum.size(); ++i) sum[i] /= weight[i];
    return sum;
}

}  // namespace airtopo
