#ifndef PUPILBENCH_CHT_HPP
#define PUPILBENCH_CHT_HPP

// Circular Hough transform detector. Runs on the 4x downsampled image: each
// Canny edge pixel votes, for every integer radius in [r_min, r_max], along
// the midpoint-rasterised circle centred on itself. The most voted
// (x, y, r) cell is the pupil circle.

#include "pupilbench/detection.hpp"
#include "pupilbench/image.hpp"
#include "pupilbench/imaging.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pupil {

struct ChtConfig {
    int r_min = 5;
    int r_max = 25;
    double canny_low = 40.0;
    double canny_high = 100.0;
    std::uint32_t min_votes = 3;
};

/// Offsets of the midpoint-rasterised circle of radius r, each listed once,
/// in a fixed order.
inline std::vector<PixelCoord> midpoint_circle(int r)
{
    if (r < 1)
        throw std::invalid_argument("circle radius must be >= 1");
    std::vector<PixelCoord> pts;
    int x = r;
    int y = 0;
    int d = 1 - r;
    while (x >= y) {
        const PixelCoord oct[8] = {{x, y}, {y, x}, {-y, x}, {-x, y}, {-x, -y}, {-y, -x}, {y, -x}, {x, -y}};
        for (const PixelCoord p : oct)
            if (std::find(pts.begin(), pts.end(), p) == pts.end())
                pts.push_back(p);
        ++y;
        if (d < 0) {
            d += 2 * y + 1;
        } else {
            --x;
            d += 2 * (y - x) + 1;
        }
    }
    return pts;
}

/// Vote counts over (x, y, r) for integer radii r_min..r_max.
class HoughAccumulator {
public:
    HoughAccumulator(int width, int height, int r_min, int r_max)
        : width_(width), height_(height), r_min_(r_min), r_max_(r_max)
    {
        if (width < 1 || height < 1)
            throw std::invalid_argument("accumulator dimensions must be >= 1");
        if (r_min < 1 || r_max < r_min)
            throw std::invalid_argument("radius range must satisfy 1 <= r_min <= r_max");
        votes_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                          static_cast<std::size_t>(r_max - r_min + 1),
                      0);
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int r_min() const noexcept { return r_min_; }
    int r_max() const noexcept { return r_max_; }

    std::uint32_t& at(int x, int y, int r) { return votes_[index(x, y, r)]; }
    std::uint32_t at(int x, int y, int r) const { return votes_[index(x, y, r)]; }

    const std::vector<std::uint32_t>& votes() const noexcept { return votes_; }

    std::uint64_t total() const
    {
        std::uint64_t t = 0;
        for (auto v : votes_)
            t += v;
        return t;
    }

    friend bool operator==(const HoughAccumulator&, const HoughAccumulator&) = default;

private:
    std::size_t index(int x, int y, int r) const
    {
        return (static_cast<std::size_t>(r - r_min_) * static_cast<std::size_t>(height_) + static_cast<std::size_t>(y)) *
                   static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_;
    int height_;
    int r_min_;
    int r_max_;
    std::vector<std::uint32_t> votes_;
};

namespace detail {

inline void vote_offsets(HoughAccumulator& acc, PixelCoord edge, int r, const std::vector<PixelCoord>& offsets)
{
    for (const PixelCoord o : offsets) {
        const int x = edge.x + o.x;
        const int y = edge.y + o.y;
        if (x >= 0 && y >= 0 && x < acc.width() && y < acc.height())
            ++acc.at(x, y, r);
    }
}

} // namespace detail

/// Adds one vote to every in-bounds cell of the radius-r circle around `edge`.
inline void vote_circle(HoughAccumulator& acc, PixelCoord edge, int r)
{
    if (r < acc.r_min() || r > acc.r_max())
        throw std::out_of_range("radius outside accumulator range");
    detail::vote_offsets(acc, edge, r, midpoint_circle(r));
}

/// Accumulates votes of every edge pixel over the configured radii.
inline HoughAccumulator hough_accumulate(const BinaryImage& edges, int r_min, int r_max)
{
    HoughAccumulator acc(edges.width(), edges.height(), r_min, r_max);
    std::vector<std::vector<PixelCoord>> circles;
    for (int r = r_min; r <= r_max; ++r)
        circles.push_back(midpoint_circle(r));
    for (int y = 0; y < edges.height(); ++y)
        for (int x = 0; x < edges.width(); ++x) {
            if (!edges(x, y))
                continue;
            for (int r = r_min; r <= r_max; ++r)
                detail::vote_offsets(acc, {x, y}, r, circles[static_cast<std::size_t>(r - r_min)]);
        }
    return acc;
}

struct HoughPeak {
    int x = 0;
    int y = 0;
    int r = 0;
    std::uint32_t votes = 0;
};

/// Global maximum; ties resolved towards the smallest (r, y, x).
inline HoughPeak hough_peak(const HoughAccumulator& acc)
{
    HoughPeak best{0, 0, acc.r_min(), 0};
    // Iteration order is r, then y, then x, so a strict comparison keeps the
    // lexicographically smallest cell among equal maxima.
    for (int r = acc.r_min(); r <= acc.r_max(); ++r)
        for (int y = 0; y < acc.height(); ++y)
            for (int x = 0; x < acc.width(); ++x)
                if (acc.at(x, y, r) > best.votes)
                    best = {x, y, r, acc.at(x, y, r)};
    return best;
}

inline Detection cht_detect(const GrayImage& img, const ChtConfig& cfg = {})
{
    const GrayImage small = downsample4(img);
    const BinaryImage edges = canny(small, cfg.canny_low, cfg.canny_high);
    if (std::none_of(edges.data().begin(), edges.data().end(), [](std::uint8_t v) { return v != 0; }))
        throw DetectionError("NoEdges", "edge map is empty");

    const HoughAccumulator acc = hough_accumulate(edges, cfg.r_min, cfg.r_max);
    const HoughPeak peak = hough_peak(acc);
    if (peak.votes < cfg.min_votes)
        throw DetectionError("NoCircleFound", "accumulator maximum below vote floor");

    Detection d;
    d.method = Method::CHT;
    d.cx = to_full_resolution(peak.x);
    d.cy = to_full_resolution(peak.y);
    d.shape = Circle{d.cx, d.cy, peak.r * kDownsampleFactor};
    d.score = peak.votes;
    return d;
}

} // namespace pupil

#endif // PUPILBENCH_CHT_HPP
