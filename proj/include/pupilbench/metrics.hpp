#ifndef PUPILBENCH_METRICS_HPP
#define PUPILBENCH_METRICS_HPP

// Accuracy metrics. A detection is correct when its centre lies within a
// quarter of the annotated pupil radius of the annotated centre (d / R <= 0.25).
// Hit rate = 100 * correct / total.

#include "pupilbench/detection.hpp"
#include "pupilbench/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>

namespace pupil {

class EmptySet : public std::invalid_argument {
public:
    explicit EmptySet(const std::string& what) : std::invalid_argument(what) {}
};

constexpr double kHitTolerance = 0.25;

/// d / R; +infinity for a failed detection.
inline double relative_error(const Detection& det, const Annotation& ann)
{
    if (!(ann.r > 0.0))
        throw std::invalid_argument("annotation radius must be > 0");
    if (!det.ok() || !std::isfinite(det.cx) || !std::isfinite(det.cy))
        return std::numeric_limits<double>::infinity();
    return std::hypot(det.cx - ann.cx, det.cy - ann.cy) / ann.r;
}

inline bool is_hit(double relative_err) { return relative_err <= kHitTolerance; }

inline double hit_rate(std::size_t hits, std::size_t total)
{
    if (total == 0)
        throw EmptySet("hit rate of an empty set");
    if (hits > total)
        throw std::invalid_argument("hits exceed total");
    return 100.0 * static_cast<double>(hits) / static_cast<double>(total);
}

inline double hit_rate(std::span<const std::pair<Detection, Annotation>> results)
{
    std::size_t hits = 0;
    for (const auto& [det, ann] : results)
        hits += is_hit(relative_error(det, ann)) ? 1 : 0;
    return hit_rate(hits, results.size());
}

/// Unweighted mean of per-category hit rates.
inline double average_robustness(std::span<const double> category_rates)
{
    if (category_rates.empty())
        throw EmptySet("average robustness of no categories");
    return std::accumulate(category_rates.begin(), category_rates.end(), 0.0) / static_cast<double>(category_rates.size());
}

/// Two-decimal rendering used in every report ("94.62").
inline std::string format_percent(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

} // namespace pupil

#endif // PUPILBENCH_METRICS_HPP
