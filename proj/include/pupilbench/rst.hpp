#ifndef PUPILBENCH_RST_HPP
#define PUPILBENCH_RST_HPP

// Radial symmetry transform, dark-region mode. For each radius n every
// pixel with a significant gradient casts a vote at its negatively-affected
// pixel p - round(n g/|g|): the orientation image O_n is decremented by one
// and the magnitude image M_n by |g|. Dark blobs of radius n collect these
// votes at their centre. The per-radius contribution
//   F_n = (M_n / k_M) (|O_n| / k_O)^alpha
// (k_M, k_O: largest magnitudes, see RstNormalization) is smoothed by a Gaussian A_n (sigma = 0.1 n) and the results are averaged
// over all radii. The extremum of |S| is the pupil centre.

#include "pupilbench/detection.hpp"
#include "pupilbench/image.hpp"
#include "pupilbench/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pupil {

/// How k_n is chosen. AcrossRadii divides every O_n (and M_n) by the largest
/// |O_n| (|M_n|) found over all radii of the set, so the per-radius maps stay
/// on one scale before they are averaged. PerRadius divides each radius by
/// its own maximum, which lifts radii that collected only a handful of stray
/// votes to the same weight as the radius that matches the pupil.
enum class RstNormalization { AcrossRadii, PerRadius };

struct RstConfig {
    int r_min = 5;
    int r_max = 25;
    double alpha = 2.0;
    /// Pixels with |g| <= grad_floor * max|g| do not vote.
    double grad_floor = 0.05;
    RstNormalization normalization = RstNormalization::AcrossRadii;

    int radius_count() const { return r_max - r_min + 1; }

    void validate() const
    {
        if (r_min < 1 || r_max < r_min)
            throw std::invalid_argument("RST radii must satisfy 1 <= r_min <= r_max");
        if (!(alpha > 0.0))
            throw std::invalid_argument("RST alpha must be > 0");
        if (grad_floor < 0.0 || grad_floor >= 1.0)
            throw std::invalid_argument("RST gradient floor must lie in [0, 1)");
    }
};

/// Smoothing kernel width for radius n: ceil(n/2), raised to the next odd size
/// so the kernel has a centre tap.
inline int rst_window(int n)
{
    const int w = (n + 1) / 2;
    return w % 2 == 0 ? w + 1 : w;
}

inline double rst_sigma(int n) { return 0.1 * n; }

/// Rounds half away from zero.
inline int round_half_away(double v)
{
    return static_cast<int>(v < 0.0 ? -std::floor(-v + 0.5) : std::floor(v + 0.5));
}

/// p - round(n g / |g|). The result may lie outside the image.
inline PixelCoord negatively_affected(PixelCoord p, double gx, double gy, int n)
{
    const double norm = std::sqrt(gx * gx + gy * gy);
    if (!(norm > 0.0))
        throw DetectionError("ZeroGradient", "negatively-affected pixel undefined for zero gradient");
    return {p.x - round_half_away(n * gx / norm), p.y - round_half_away(n * gy / norm)};
}

struct RstProjection {
    int radius = 0;
    RealField orientation; // O_n, <= 0 everywhere
    RealField magnitude;   // M_n, <= 0 everywhere
};

inline RstProjection accumulate_projections(const GradientField& grad, int n, double grad_floor)
{
    if (n < 1)
        throw std::invalid_argument("RST radius must be >= 1");
    const int w = grad.width();
    const int h = grad.height();
    RstProjection proj{n, RealField(w, h, 0.0), RealField(w, h, 0.0)};
    const auto& mags = grad.magnitude.data();
    const double max_mag = mags.empty() ? 0.0 : *std::max_element(mags.begin(), mags.end());
    const double floor = grad_floor * max_mag;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double m = grad.magnitude(x, y);
            if (!(m > floor) || !(m > 0.0))
                continue;
            const PixelCoord q = negatively_affected({x, y}, grad.gx(x, y), grad.gy(x, y), n);
            if (!proj.orientation.contains(q))
                continue;
            proj.orientation[q] -= 1.0;
            proj.magnitude[q] -= m;
        }
    return proj;
}

struct RstScale {
    double k_o = 0.0; // max |O_n|
    double k_m = 0.0; // max |M_n|

    void include(const RstProjection& proj)
    {
        for (double v : proj.orientation.data())
            k_o = std::max(k_o, std::abs(v));
        for (double v : proj.magnitude.data())
            k_m = std::max(k_m, std::abs(v));
    }
};

/// S_n = F_n * A_n with explicit normalisers.
inline RealField symmetry_contribution(const RstProjection& proj, const RstConfig& cfg, const RstScale& scale)
{
    const int w = proj.orientation.width();
    const int h = proj.orientation.height();
    if (scale.k_o == 0.0 || scale.k_m == 0.0)
        return RealField(w, h, 0.0);

    RealField f(w, h);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double o = std::abs(proj.orientation.data()[i]) / scale.k_o;
        const double ratio = cfg.alpha == 2.0 ? o * o : std::pow(o, cfg.alpha);
        f.data()[i] = (proj.magnitude.data()[i] / scale.k_m) * ratio;
    }
    return gaussian_smooth(f, rst_sigma(proj.radius), rst_window(proj.radius));
}

/// S_n normalised by this projection's own maxima.
inline RealField symmetry_contribution(const RstProjection& proj, const RstConfig& cfg)
{
    RstScale scale;
    scale.include(proj);
    return symmetry_contribution(proj, cfg, scale);
}

struct SymmetryMap {
    RealField s;                        // (1/|N|) sum of S_n
    std::vector<RealField> per_radius;  // S_n in radius order
    int r_min = 0;
};

/// Symmetry map of an already downsampled image. Empty when the gradient
/// field is identically zero.
inline std::optional<SymmetryMap> radial_symmetry(const GrayImage& img, const RstConfig& cfg)
{
    cfg.validate();
    const GradientField grad = gradient(img);
    const auto& mags = grad.magnitude.data();
    if (std::all_of(mags.begin(), mags.end(), [](double m) { return m == 0.0; }))
        return std::nullopt;

    std::vector<RstProjection> projections;
    RstScale across;
    for (int n = cfg.r_min; n <= cfg.r_max; ++n) {
        projections.push_back(accumulate_projections(grad, n, cfg.grad_floor));
        across.include(projections.back());
    }

    SymmetryMap map{RealField(img.width(), img.height(), 0.0), {}, cfg.r_min};
    for (const RstProjection& proj : projections) {
        map.per_radius.push_back(cfg.normalization == RstNormalization::AcrossRadii
                                     ? symmetry_contribution(proj, cfg, across)
                                     : symmetry_contribution(proj, cfg));
        const auto& sn = map.per_radius.back().data();
        auto& s = map.s.data();
        for (std::size_t i = 0; i < s.size(); ++i)
            s[i] += sn[i];
    }
    const double inv = 1.0 / cfg.radius_count();
    for (double& v : map.s.data())
        v *= inv;
    return map;
}

struct RstPeak {
    PixelCoord center;
    int radius = 0;
    double value = 0.0; // |S| at the centre
};

/// Extremum of |S| (ties toward the smallest (y, x)); the reported radius is
/// the n whose |S_n| is largest at that pixel (ties toward the smallest n).
inline RstPeak symmetry_peak(const SymmetryMap& map)
{
    RstPeak best{{0, 0}, map.r_min, -1.0};
    for (int y = 0; y < map.s.height(); ++y)
        for (int x = 0; x < map.s.width(); ++x) {
            const double v = std::abs(map.s(x, y));
            if (v > best.value)
                best = {{x, y}, map.r_min, v};
        }
    double best_n = -1.0;
    for (std::size_t i = 0; i < map.per_radius.size(); ++i) {
        const double v = std::abs(map.per_radius[i][best.center]);
        if (v > best_n) {
            best_n = v;
            best.radius = map.r_min + static_cast<int>(i);
        }
    }
    return best;
}

inline Detection rst_detect(const GrayImage& img, const RstConfig& cfg = {})
{
    const std::optional<SymmetryMap> map = radial_symmetry(downsample4(img), cfg);
    if (!map)
        throw DetectionError("FlatImage", "gradient field is identically zero");
    const RstPeak peak = symmetry_peak(*map);

    Detection d;
    d.method = Method::RST;
    d.cx = to_full_resolution(peak.center.x);
    d.cy = to_full_resolution(peak.center.y);
    d.shape = Circle{d.cx, d.cy, peak.radius * kDownsampleFactor};
    d.score = peak.value;
    return d;
}

} // namespace pupil

#endif // PUPILBENCH_RST_HPP
