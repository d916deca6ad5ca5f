#ifndef PUPILBENCH_IMAGING_HPP
#define PUPILBENCH_IMAGING_HPP

// Preprocessing primitives shared by the four detectors. Every function is a
// pure function of its arguments; border handling is fixed per operation so
// results are bit-reproducible.

#include "pupilbench/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pupil {

/// Output is 1 where img > threshold, 0 otherwise.
inline BinaryImage threshold_binarize(const GrayImage& img, int threshold)
{
    if (threshold < 0 || threshold > 255)
        throw std::invalid_argument("threshold must lie in [0, 255]");
    BinaryImage out(img.width(), img.height());
    auto& dst = out.data();
    const auto& src = img.data();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = src[i] > threshold ? 1 : 0;
    return out;
}

/// Disk-shaped structuring element {(dx, dy) : dx^2 + dy^2 <= radius^2}.
struct StructuringElement {
    int radius = 1;

    static StructuringElement disk(int radius)
    {
        if (radius < 1)
            throw std::invalid_argument("structuring element radius must be >= 1");
        return StructuringElement{radius};
    }

    // Half-width of the disk row at vertical offset dy.
    int half_width(int dy) const
    {
        int w = 0;
        while ((w + 1) * (w + 1) + dy * dy <= radius * radius)
            ++w;
        return w;
    }

    bool contains(int dx, int dy) const { return dx * dx + dy * dy <= radius * radius; }
};

namespace detail {

// Summed-area table of (value == target), (w+1) x (h+1).
struct TargetCounts {
    int w = 0;
    int h = 0;
    std::vector<int> table;

    TargetCounts(const BinaryImage& img, std::uint8_t target) : w(img.width()), h(img.height())
    {
        table.assign(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(h + 1), 0);
        for (int y = 0; y < h; ++y) {
            int run = 0;
            for (int x = 0; x < w; ++x) {
                run += img(x, y) == target ? 1 : 0;
                at(x + 1, y + 1) = at(x + 1, y) + run;
            }
        }
    }
    int& at(int x, int y) { return table[static_cast<std::size_t>(y) * static_cast<std::size_t>(w + 1) + static_cast<std::size_t>(x)]; }
    int get(int x, int y) const
    {
        return table[static_cast<std::size_t>(y) * static_cast<std::size_t>(w + 1) + static_cast<std::size_t>(x)];
    }
    // Count inside [x0, x1] x [y0, y1] after clipping to the image.
    int box(int x0, int y0, int x1, int y1) const
    {
        x0 = std::max(x0, 0);
        y0 = std::max(y0, 0);
        x1 = std::min(x1, w - 1);
        y1 = std::min(y1, h - 1);
        if (x0 > x1 || y0 > y1)
            return 0;
        return get(x1 + 1, y1 + 1) - get(x0, y1 + 1) - get(x1 + 1, y0) + get(x0, y0);
    }
};

// Morphological scan: result(x,y) = hit_value if any pixel under the disk equals
// target, else !hit_value. Out-of-image rows/columns never match target. The
// bounding square and the inscribed square of the disk settle most pixels
// with one lookup each; only pixels near a boundary walk the disk rows.
inline BinaryImage disk_scan(const BinaryImage& img, const StructuringElement& se, std::uint8_t target,
                             std::uint8_t hit_value)
{
    const int w = img.width();
    const int h = img.height();
    const int r = se.radius;
    const TargetCounts counts(img, target);
    std::vector<int> widths(static_cast<std::size_t>(2 * r + 1));
    for (int dy = -r; dy <= r; ++dy)
        widths[static_cast<std::size_t>(dy + r)] = se.half_width(dy);
    int inner = 0;
    while (se.contains(inner + 1, inner + 1))
        ++inner;

    BinaryImage out(w, h, static_cast<std::uint8_t>(hit_value ? 0 : 1));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (counts.box(x - r, y - r, x + r, y + r) == 0)
                continue;
            bool hit = counts.box(x - inner, y - inner, x + inner, y + inner) > 0;
            for (int dy = -r; dy <= r && !hit; ++dy) {
                const int hw = widths[static_cast<std::size_t>(dy + r)];
                hit = counts.box(x - hw, y + dy, x + hw, y + dy) > 0;
            }
            if (hit)
                out(x, y) = hit_value;
        }
    }
    return out;
}

} // namespace detail

/// Out-of-image pixels count as 0.
inline BinaryImage dilate(const BinaryImage& img, const StructuringElement& se)
{
    return detail::disk_scan(img, se, 1, 1);
}

/// Out-of-image pixels count as 1.
inline BinaryImage erode(const BinaryImage& img, const StructuringElement& se)
{
    return detail::disk_scan(img, se, 0, 0);
}

/// Morphological closing: dilation followed by erosion.
inline BinaryImage close(const BinaryImage& img, const StructuringElement& se)
{
    return erode(dilate(img, se), se);
}

/// Normalised 1-D Gaussian taps; the centre is at (window - 1) / 2.
inline std::vector<double> gaussian_kernel(double sigma, int window)
{
    if (!(sigma > 0.0))
        throw std::invalid_argument("sigma must be > 0");
    if (window < 1)
        throw std::invalid_argument("window must be >= 1");
    std::vector<double> k(static_cast<std::size_t>(window));
    const double c = (window - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < window; ++i) {
        const double d = i - c;
        k[static_cast<std::size_t>(i)] = std::exp(-(d * d) / (2.0 * sigma * sigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k)
        v /= sum;
    return k;
}

/// Separable convolution with a square kernel built from `taps`, replicate borders.
inline RealField convolve_separable(const RealField& field, const std::vector<double>& taps)
{
    const int w = field.width();
    const int h = field.height();
    const int half = static_cast<int>(taps.size() - 1) / 2;
    const int n = static_cast<int>(taps.size());
    const double* k = taps.data();

    // Horizontal pass over a row padded by replication.
    RealField tmp(w, h);
    std::vector<double> padded(static_cast<std::size_t>(w + n));
    for (int y = 0; y < h; ++y) {
        for (int i = 0; i < w + n - 1; ++i)
            padded[static_cast<std::size_t>(i)] = field(std::clamp(i - half, 0, w - 1), y);
        double* dst = &tmp(0, y);
        for (int x = 0; x < w; ++x) {
            const double* src = padded.data() + x;
            double acc = 0.0;
            for (int i = 0; i < n; ++i)
                acc += k[i] * src[i];
            dst[x] = acc;
        }
    }
    // Vertical pass, whole rows at a time.
    RealField out(w, h, 0.0);
    for (int y = 0; y < h; ++y) {
        double* dst = &out(0, y);
        for (int i = 0; i < n; ++i) {
            const double* src = &tmp(0, std::clamp(y + i - half, 0, h - 1));
            const double ki = k[i];
            for (int x = 0; x < w; ++x)
                dst[x] += ki * src[x];
        }
    }
    return out;
}

inline RealField gaussian_smooth(const RealField& field, double sigma, int window)
{
    return convolve_separable(field, gaussian_kernel(sigma, window));
}

struct GradientField {
    RealField gx;
    RealField gy;
    RealField magnitude;

    int width() const { return gx.width(); }
    int height() const { return gx.height(); }
};

/// 3x3 Sobel gradient. Border pixels get zero gradient. +x points right, +y down.
inline GradientField gradient(const GrayImage& img)
{
    const int w = img.width();
    const int h = img.height();
    if (w < 3 || h < 3)
        throw ImageTooSmall("gradient needs an image of at least 3x3 pixels");
    GradientField g{RealField(w, h), RealField(w, h), RealField(w, h)};
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            const auto p = [&](int dx, int dy) { return static_cast<double>(img(x + dx, y + dy)); };
            const double gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            const double gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            g.gx(x, y) = gx;
            g.gy(x, y) = gy;
            g.magnitude(x, y) = std::sqrt(gx * gx + gy * gy);
        }
    return g;
}

/// Canny edge detector: 5x5 Gaussian (sigma 1.4), Sobel, non-maximum
/// suppression, hysteresis. Thresholds apply to the raw Sobel magnitude, in
/// the same units as the common reference implementation. Output 1 = edge.
inline BinaryImage canny(const GrayImage& img, double low, double high)
{
    if (low < 0.0 || high > 255.0 || low > high)
        throw std::invalid_argument("canny thresholds must satisfy 0 <= low <= high <= 255");
    const int w = img.width();
    const int h = img.height();
    const RealField blurred = convolve_separable(to_real(img), gaussian_kernel(1.4, 5));

    // Replicate-padded copies let the 3x3 stencils below index without bounds checks.
    const int pw = w + 2;
    const auto pad = [&](const RealField& f) {
        std::vector<double> out(static_cast<std::size_t>(pw) * static_cast<std::size_t>(h + 2));
        for (int y = -1; y <= h; ++y) {
            const double* src = &f(0, std::clamp(y, 0, h - 1));
            double* dst = out.data() + static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(pw);
            std::copy(src, src + w, dst + 1);
            dst[0] = src[0];
            dst[w + 1] = src[w - 1];
        }
        return out;
    };

    const std::vector<double> pb = pad(blurred);
    RealField mag(w, h);
    std::vector<std::uint8_t> dir(img.size());
    for (int y = 0; y < h; ++y) {
        const double* up = pb.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(pw) + 1;
        const double* mid = up + pw;
        const double* down = mid + pw;
        for (int x = 0; x < w; ++x) {
            const double gx = (up[x + 1] + 2.0 * mid[x + 1] + down[x + 1]) - (up[x - 1] + 2.0 * mid[x - 1] + down[x - 1]);
            const double gy = (down[x - 1] + 2.0 * down[x] + down[x + 1]) - (up[x - 1] + 2.0 * up[x] + up[x + 1]);
            mag(x, y) = std::sqrt(gx * gx + gy * gy);
            // Quantise the gradient direction to 0, 45, 90 or 135 degrees.
            const double ax = std::abs(gx);
            const double ay = std::abs(gy);
            std::uint8_t d;
            if (ay <= ax * 0.41421356237309503)
                d = 0;
            else if (ax <= ay * 0.41421356237309503)
                d = 2;
            else
                d = (gx * gy > 0) ? 1 : 3;
            dir[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)] = d;
        }
    }

    const std::vector<double> pm = pad(mag);
    const std::array<std::ptrdiff_t, 4> step{1, pw + 1, pw, pw - 1};
    RealField thin(w, h, 0.0);
    for (int y = 0; y < h; ++y) {
        const double* row = pm.data() + static_cast<std::size_t>(y + 1) * static_cast<std::size_t>(pw) + 1;
        for (int x = 0; x < w; ++x) {
            const double m = row[x];
            if (m <= low)
                continue;
            const std::ptrdiff_t s = step[dir[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)]];
            // Strict on one side, non-strict on the other: a symmetric plateau
            // of two equal maxima keeps exactly one pixel.
            if (m > row[x - s] && m >= row[x + s])
                thin(x, y) = m;
        }
    }

    BinaryImage out(w, h, 0);
    std::vector<PixelCoord> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (thin(x, y) <= high || out(x, y))
                continue;
            out(x, y) = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const PixelCoord p = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx;
                        const int ny = p.y + dy;
                        if (!out.contains(nx, ny) || out(nx, ny) || thin(nx, ny) <= low)
                            continue;
                        out(nx, ny) = 1;
                        stack.push_back({nx, ny});
                    }
            }
        }
    return out;
}

struct Component {
    int label = 0;
    std::vector<PixelCoord> pixels; // row-major order
};

/// 8-connected components, largest first; equal sizes keep row-major order of
/// their first pixel. Labels are 1-based positions in the returned list.
inline std::vector<Component> connected_components(const BinaryImage& img)
{
    const int w = img.width();
    const int h = img.height();
    std::vector<int> seen(img.size(), 0);
    std::vector<Component> comps;
    std::vector<PixelCoord> stack;
    const auto idx = [w](int x, int y) { return static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x); };

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!img(x, y) || seen[idx(x, y)])
                continue;
            Component c;
            seen[idx(x, y)] = 1;
            stack.push_back({x, y});
            while (!stack.empty()) {
                const PixelCoord p = stack.back();
                stack.pop_back();
                c.pixels.push_back(p);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = p.x + dx;
                        const int ny = p.y + dy;
                        if (!img.contains(nx, ny) || !img(nx, ny) || seen[idx(nx, ny)])
                            continue;
                        seen[idx(nx, ny)] = 1;
                        stack.push_back({nx, ny});
                    }
            }
            std::sort(c.pixels.begin(), c.pixels.end(), [](PixelCoord a, PixelCoord b) {
                return a.y != b.y ? a.y < b.y : a.x < b.x;
            });
            comps.push_back(std::move(c));
        }

    std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
        return a.pixels.size() > b.pixels.size();
    });
    for (std::size_t i = 0; i < comps.size(); ++i)
        comps[i].label = static_cast<int>(i) + 1;
    return comps;
}

/// Factor-4 reduction by rounded 4x4 block means. A downsampled pixel (i, j)
/// covers full-resolution pixels centred on (4i + 1.5, 4j + 1.5).
inline GrayImage downsample4(const GrayImage& img)
{
    if (img.width() < 4 || img.height() < 4)
        throw ImageTooSmall("downsample4 needs an image of at least 4x4 pixels");
    const int w = img.width() / 4;
    const int h = img.height() / 4;
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            int sum = 0;
            for (int dy = 0; dy < 4; ++dy)
                for (int dx = 0; dx < 4; ++dx)
                    sum += img(4 * x + dx, 4 * y + dy);
            out(x, y) = static_cast<std::uint8_t>((sum + 8) / 16);
        }
    return out;
}

constexpr double kDownsampleFactor = 4.0;
constexpr double kDownsampleOffset = 1.5;

inline double to_full_resolution(double downsampled)
{
    return downsampled * kDownsampleFactor + kDownsampleOffset;
}

/// Replaces each bright spot (8-connected pixels > bright_threshold) by the
/// rounded mean of its one-pixel outer boundary ring. A spot with no boundary
/// (covering the whole image) is left untouched.
inline GrayImage remove_light_spots(const GrayImage& img, int bright_threshold)
{
    if (bright_threshold < 0 || bright_threshold > 255)
        throw std::invalid_argument("bright threshold must lie in [0, 255]");
    GrayImage out = img;
    const BinaryImage spots = threshold_binarize(img, bright_threshold);
    BinaryImage ring_mark(img.width(), img.height(), 0);
    for (const Component& c : connected_components(spots)) {
        long sum = 0;
        long count = 0;
        std::vector<PixelCoord> ring;
        for (const PixelCoord p : c.pixels)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = p.x + dx;
                    const int ny = p.y + dy;
                    if (!img.contains(nx, ny) || spots(nx, ny) || ring_mark(nx, ny))
                        continue;
                    ring_mark(nx, ny) = 1;
                    ring.push_back({nx, ny});
                    sum += img(nx, ny);
                    ++count;
                }
        for (const PixelCoord p : ring)
            ring_mark[p] = 0;
        if (count == 0)
            continue;
        const auto fill = static_cast<std::uint8_t>((2 * sum + count) / (2 * count));
        for (const PixelCoord p : c.pixels)
            out[p] = fill;
    }
    return out;
}

} // namespace pupil

#endif // PUPILBENCH_IMAGING_HPP
