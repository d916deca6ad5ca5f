#ifndef PUPILBENCH_IDO_HPP
#define PUPILBENCH_IDO_HPP

// Integro-differential operator detector. On the 4x downsampled image, after
// specular spots are filled in, only dark 3x3 local minima are kept as centre
// candidates. For each candidate the perimeter-normalised circular line
// integral of intensity is sampled over the radius range; the operator value
// is the absolute radial derivative of that profile, smoothed by a Gaussian
// in r. The (candidate, radius) with the largest value is the pupil.

#include "pupilbench/detection.hpp"
#include "pupilbench/image.hpp"
#include "pupilbench/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace pupil {

struct IdoConfig {
    int r_min = 5;
    int r_max = 25;
    int threshold = 25;
    int bright_threshold = 200;
    double radial_sigma = 1.0;
    int radial_window = 3;
};

struct IdoCandidateSet {
    std::vector<PixelCoord> pixels;
    int width = 0;
    int height = 0;
};

inline int circle_sample_count(double r)
{
    return std::max(8, static_cast<int>(std::lround(2.0 * std::numbers::pi * r)));
}

namespace detail {

inline double bilinear(const GrayImage& img, double x, double y)
{
    const int x0 = std::min(static_cast<int>(std::floor(x)), img.width() - 1);
    const int y0 = std::min(static_cast<int>(std::floor(y)), img.height() - 1);
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = img(x0, y0) * (1.0 - fx) + img(x1, y0) * fx;
    const double bottom = img(x0, y1) * (1.0 - fx) + img(x1, y1) * fx;
    return top * (1.0 - fy) + bottom * fy;
}

struct UnitCircle {
    std::vector<double> cos;
    std::vector<double> sin;

    explicit UnitCircle(double r)
    {
        const int n = circle_sample_count(r);
        cos.resize(static_cast<std::size_t>(n));
        sin.resize(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double t = 2.0 * std::numbers::pi * k / n;
            cos[static_cast<std::size_t>(k)] = std::cos(t);
            sin[static_cast<std::size_t>(k)] = std::sin(t);
        }
    }
};

inline std::optional<double> contour_mean(const GrayImage& img, PixelCoord center, double r, const UnitCircle& unit)
{
    const std::size_t n = unit.cos.size();
    double sum = 0.0;
    std::size_t inside = 0;
    const double xmax = img.width() - 1;
    const double ymax = img.height() - 1;
    for (std::size_t k = 0; k < n; ++k) {
        const double x = center.x + r * unit.cos[k];
        const double y = center.y + r * unit.sin[k];
        if (x < 0.0 || y < 0.0 || x > xmax || y > ymax)
            continue;
        sum += bilinear(img, x, y);
        ++inside;
    }
    if (2 * (n - inside) > n)
        return std::nullopt;
    return sum / static_cast<double>(inside);
}

} // namespace detail

/// Mean intensity along the circle of radius r around `center`, from
/// max(8, round(2 pi r)) equiangular bilinear samples. Empty when more than
/// half of the samples fall outside the image.
inline std::optional<double> contour_mean(const GrayImage& img, PixelCoord center, double r)
{
    if (!(r >= 1.0))
        throw std::invalid_argument("contour radius must be >= 1");
    return detail::contour_mean(img, center, r, detail::UnitCircle(r));
}

/// |G_sigma * d/dr| of a contour-mean profile sampled at consecutive integer radii.
inline std::vector<double> ido_score(std::span<const double> means, double sigma = 1.0, int window = 3)
{
    const std::size_t n = means.size();
    if (n < 3)
        throw DetectionError("TooFewRadii", "operator needs at least 3 consecutive radii");
    RealField deriv(static_cast<int>(n), 1);
    deriv(0, 0) = means[1] - means[0];
    deriv(static_cast<int>(n) - 1, 0) = means[n - 1] - means[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
        deriv(static_cast<int>(i), 0) = (means[i + 1] - means[i - 1]) / 2.0;

    const std::vector<double> taps = gaussian_kernel(sigma, window);
    const int half = (window - 1) / 2;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = 0; k < window; ++k)
            acc += taps[static_cast<std::size_t>(k)] * deriv.clamped(static_cast<int>(i) + k - half, 0);
        out[i] = std::abs(acc);
    }
    return out;
}

/// Dark (<= threshold) pixels that are minima of their 3x3 window. Scanning in
/// row-major order, a minimum is dropped when an already kept pixel lies in its
/// window, so a flat dark plateau leaves one survivor per 3x3 tie group.
inline IdoCandidateSet prune_candidates(const GrayImage& img, int threshold)
{
    IdoCandidateSet set{{}, img.width(), img.height()};
    BinaryImage kept(img.width(), img.height(), 0);
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) {
            const int v = img(x, y);
            if (v > threshold)
                continue;
            bool keep = true;
            for (int dy = -1; dy <= 1 && keep; ++dy)
                for (int dx = -1; dx <= 1 && keep; ++dx) {
                    if (!img.contains(x + dx, y + dy))
                        continue;
                    if (img(x + dx, y + dy) < v || kept(x + dx, y + dy))
                        keep = false;
                }
            if (keep) {
                kept(x, y) = 1;
                set.pixels.push_back({x, y});
            }
        }
    return set;
}

struct IdoPeak {
    PixelCoord center;
    int r = 0;
    double score = 0.0;
};

namespace detail {

inline bool ido_better(const IdoPeak& cand, const IdoPeak& best)
{
    if (cand.score != best.score)
        return cand.score > best.score;
    return std::tie(cand.r, cand.center.y, cand.center.x) < std::tie(best.r, best.center.y, best.center.x);
}

} // namespace detail

/// Best (candidate, radius) on an already preprocessed downsampled image.
inline std::optional<IdoPeak> ido_search(const GrayImage& img, const IdoCandidateSet& candidates, const IdoConfig& cfg)
{
    if (cfg.r_min < 1 || cfg.r_max < cfg.r_min + 2)
        throw std::invalid_argument("radius range must hold at least 3 radii starting at >= 1");
    std::vector<detail::UnitCircle> circles;
    for (int r = cfg.r_min; r <= cfg.r_max; ++r)
        circles.emplace_back(r);

    std::optional<IdoPeak> best;
    std::vector<double> means;
    for (const PixelCoord c : candidates.pixels) {
        // Radii grow outward, so the valid part of the profile is a prefix.
        means.clear();
        for (int r = cfg.r_min; r <= cfg.r_max; ++r) {
            const auto m = detail::contour_mean(img, c, r, circles[static_cast<std::size_t>(r - cfg.r_min)]);
            if (!m)
                break;
            means.push_back(*m);
        }
        if (means.size() < 3)
            continue;
        const std::vector<double> scores = ido_score(means, cfg.radial_sigma, cfg.radial_window);
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const IdoPeak p{c, cfg.r_min + static_cast<int>(i), scores[i]};
            if (!best || detail::ido_better(p, *best))
                best = p;
        }
    }
    return best;
}

inline Detection ido_detect(const GrayImage& img, const IdoConfig& cfg = {})
{
    const GrayImage small = remove_light_spots(downsample4(img), cfg.bright_threshold);
    const IdoCandidateSet candidates = prune_candidates(small, cfg.threshold);
    if (candidates.pixels.empty())
        throw DetectionError("NoCandidates", "no dark local minima below threshold");
    const std::optional<IdoPeak> peak = ido_search(small, candidates, cfg);
    if (!peak || !(peak->score > 0.0))
        throw DetectionError("NoMaximum", "operator is zero for every candidate");

    Detection d;
    d.method = Method::IDO;
    d.cx = to_full_resolution(peak->center.x);
    d.cy = to_full_resolution(peak->center.y);
    d.shape = Circle{d.cx, d.cy, peak->r * kDownsampleFactor};
    d.score = peak->score;
    return d;
}

} // namespace pupil

#endif // PUPILBENCH_IDO_HPP
