#ifndef PUPILBENCH_OVERLAY_HPP
#define PUPILBENCH_OVERLAY_HPP

#include "pupilbench/codec.hpp"
#include "pupilbench/detection.hpp"
#include "pupilbench/image.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace pupil {

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> rgb; // 3 bytes per pixel, row-major

    void put(int x, int y, std::array<std::uint8_t, 3> c)
    {
        if (x < 0 || y < 0 || x >= width || y >= height)
            return;
        const std::size_t i = (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)) * 3;
        rgb[i] = c[0];
        rgb[i + 1] = c[1];
        rgb[i + 2] = c[2];
    }
};

inline std::array<std::uint8_t, 3> method_color(Method m)
{
    switch (m) {
    case Method::CHT: return {255, 64, 64};
    case Method::EF: return {64, 220, 64};
    case Method::IDO: return {64, 128, 255};
    case Method::RST: return {255, 200, 0};
    }
    return {255, 255, 255};
}

/// Grey input with each successful detection's shape outline and a centre
/// crosshair drawn in a per-method colour.
inline RgbImage draw_overlay(const GrayImage& img, std::span<const Detection> detections)
{
    RgbImage out{img.width(), img.height(), {}};
    out.rgb.reserve(img.size() * 3);
    for (std::uint8_t v : img.data())
        out.rgb.insert(out.rgb.end(), {v, v, v});

    for (const Detection& d : detections) {
        if (!d.ok())
            continue;
        const auto color = method_color(d.method);
        double a = 0.0, b = 0.0, theta = 0.0;
        if (const auto* c = std::get_if<Circle>(&d.shape)) {
            a = b = c->r;
        } else if (const auto* e = std::get_if<Ellipse>(&d.shape)) {
            a = e->a, b = e->b, theta = e->theta;
        }
        if (a > 0.0) {
            const int steps = std::max(64, static_cast<int>(8.0 * a));
            for (int k = 0; k < steps; ++k) {
                const double t = 2.0 * std::numbers::pi * k / steps;
                const double u = a * std::cos(t);
                const double v = b * std::sin(t);
                out.put(static_cast<int>(std::lround(d.cx + u * std::cos(theta) - v * std::sin(theta))),
                        static_cast<int>(std::lround(d.cy + u * std::sin(theta) + v * std::cos(theta))), color);
            }
        }
        const int cx = static_cast<int>(std::lround(d.cx));
        const int cy = static_cast<int>(std::lround(d.cy));
        for (int k = -6; k <= 6; ++k) {
            out.put(cx + k, cy, color);
            out.put(cx, cy + k, color);
        }
    }
    return out;
}

inline std::vector<std::uint8_t> encode_overlay_png(const RgbImage& img)
{
    return encode_png_rgb(img.width, img.height, img.rgb);
}

} // namespace pupil

#endif // PUPILBENCH_OVERLAY_HPP
