#ifndef PUPILBENCH_EF_HPP
#define PUPILBENCH_EF_HPP

#include "pupilbench/detection.hpp"
#include "pupilbench/ellipse_fit.hpp"
#include "pupilbench/image.hpp"
#include "pupilbench/imaging.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace pupil {

struct EfConfig {
    int threshold = 25;
    int se_radius = 5;
    double canny_low = 40.0;
    double canny_high = 100.0;
};

/// Pixels of the largest 8-connected edge chain of the binarised, closed image.
inline std::vector<PixelCoord> extract_pupil_contour(const GrayImage& img, const EfConfig& cfg = {})
{
    const BinaryImage closed = close(threshold_binarize(img, cfg.threshold), StructuringElement::disk(cfg.se_radius));
    const int w = closed.width();
    const int h = closed.height();

    // Canny cannot fire where the 0/255 image is constant over its 5x5 blur,
    // 3x3 Sobel and NMS footprint, so it only needs to run on the bounding box
    // of the 0/1 transitions grown by that reach. A constant crop border makes
    // replicate padding agree with the full image, so the edges are identical.
    int x0 = w, y0 = h, x1 = -1, y1 = -1;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const std::uint8_t v = closed(x, y);
            if ((x + 1 < w && closed(x + 1, y) != v) || (y + 1 < h && closed(x, y + 1) != v)) {
                x0 = std::min(x0, x);
                y0 = std::min(y0, y);
                x1 = std::max(x1, x + 1);
                y1 = std::max(y1, y + 1);
            }
        }
    if (x1 < 0)
        throw DetectionError("NoContour", "binarised image has no dark/bright boundary");
    constexpr int kReach = 6;
    x0 = std::max(0, x0 - kReach);
    y0 = std::max(0, y0 - kReach);
    x1 = std::min(w - 1, x1 + kReach);
    y1 = std::min(h - 1, y1 + kReach);

    GrayImage crop(x1 - x0 + 1, y1 - y0 + 1);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x)
            crop(x - x0, y - y0) = closed(x, y) ? 255 : 0;
    auto comps = connected_components(canny(crop, cfg.canny_low, cfg.canny_high));
    if (comps.empty())
        throw DetectionError("NoContour", "no edge chain found after binarisation and closing");
    std::vector<PixelCoord> contour = std::move(comps.front().pixels);
    for (PixelCoord& p : contour) {
        p.x += x0;
        p.y += y0;
    }
    return contour;
}

/// Full-resolution ellipse-fitting detector.
inline Detection ef_detect(const GrayImage& img, const EfConfig& cfg = {})
{
    const std::vector<PixelCoord> contour = extract_pupil_contour(img, cfg);
    const Ellipse el = conic_to_ellipse(fit_ellipse_direct(contour));
    Detection d;
    d.method = Method::EF;
    d.cx = el.cx;
    d.cy = el.cy;
    d.shape = el;
    d.score = static_cast<double>(contour.size());
    return d;
}

} // namespace pupil

#endif // PUPILBENCH_EF_HPP
