#ifndef PUPILBENCH_ELLIPSE_FIT_HPP
#define PUPILBENCH_ELLIPSE_FIT_HPP

// Direct least-squares ellipse fitting. Minimises the summed squared algebraic
// distance of the conic a x^2 + b xy + c y^2 + d x + e y + f subject to the
// quadratic constraint 4ac - b^2 = 1, posed as the generalised eigensystem
// S a = lambda C a with S the 6x6 scatter matrix. Because only the quadratic
// 3x3 block of C is non-zero, the pencil is reduced to an ordinary 3x3
// eigenproblem on the quadratic coefficients; the linear coefficients follow
// from them.

#include "pupilbench/detection.hpp"
#include "pupilbench/image.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace pupil {

struct ConicCoefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double e = 0.0;
    double f = 0.0;

    /// Algebraic distance of (x, y) to the conic.
    double operator()(double x, double y) const { return a * x * x + b * x * y + c * y * y + d * x + e * y + f; }

    double discriminant() const { return 4.0 * a * c - b * b; }
};

/// Constraint matrix of the ellipse-specific fit: a^T C a = 4ac - b^2.
inline Eigen::Matrix<double, 6, 6> ellipse_constraint_matrix()
{
    Eigen::Matrix<double, 6, 6> c = Eigen::Matrix<double, 6, 6>::Zero();
    c(0, 2) = 2.0;
    c(2, 0) = 2.0;
    c(1, 1) = -1.0;
    return c;
}

struct DirectFitResult {
    ConicCoefficients conic;
    /// Number of eigenvectors of the reduced system with a positive constraint
    /// value. Exactly one for non-degenerate input.
    int positive_constraint_count = 0;
};

constexpr std::size_t kMinEllipsePoints = 6;

inline DirectFitResult fit_ellipse_direct_detailed(std::span<const Point2d> points)
{
    if (points.size() < kMinEllipsePoints)
        throw DetectionError("InsufficientPoints", "ellipse fit needs at least 6 points");

    // Centre on the centroid and scale isotropically by the mean absolute
    // deviation to condition the scatter matrix.
    double mx = 0.0;
    double my = 0.0;
    for (const Point2d& p : points) {
        mx += p.x;
        my += p.y;
    }
    const auto n = static_cast<double>(points.size());
    mx /= n;
    my /= n;
    double s = 0.0;
    for (const Point2d& p : points)
        s += std::abs(p.x - mx) + std::abs(p.y - my);
    s /= 2.0 * n;
    if (!(s > 0.0))
        throw DetectionError("DegenerateConfiguration", "all points coincide");

    Eigen::Matrix<double, Eigen::Dynamic, 6> design(points.size(), 6);
    for (Eigen::Index i = 0; i < design.rows(); ++i) {
        const double u = (points[static_cast<std::size_t>(i)].x - mx) / s;
        const double v = (points[static_cast<std::size_t>(i)].y - my) / s;
        design.row(i) << u * u, u * v, v * v, u, v, 1.0;
    }
    const Eigen::Matrix<double, 6, 6> scatter = design.transpose() * design;
    const Eigen::Matrix3d s1 = scatter.topLeftCorner<3, 3>();
    const Eigen::Matrix3d s2 = scatter.topRightCorner<3, 3>();
    const Eigen::Matrix3d s3 = scatter.bottomRightCorner<3, 3>();

    // S3 is the scatter of (u, v, 1); it is singular exactly when the points
    // are collinear.
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> s3_eig(s3);
    const double s3_max = s3_eig.eigenvalues().cwiseAbs().maxCoeff();
    if (!(s3_eig.eigenvalues().minCoeff() > 1e-12 * s3_max))
        throw DetectionError("DegenerateConfiguration", "points are collinear");

    const Eigen::Matrix3d t = -s3.ldlt().solve(s2.transpose());
    const Eigen::Matrix3d reduced = s1 + s2 * t;
    Eigen::Matrix3d c1_inv;
    c1_inv << 0.0, 0.0, 0.5, 0.0, -1.0, 0.0, 0.5, 0.0, 0.0;
    const Eigen::Matrix3d m = c1_inv * reduced;

    const Eigen::EigenSolver<Eigen::Matrix3d> eig(m);
    if (eig.info() != Eigen::Success)
        throw DetectionError("DegenerateConfiguration", "eigen decomposition failed");

    DirectFitResult result;
    Eigen::Vector3d best = Eigen::Vector3d::Zero();
    double best_lambda = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        const Eigen::Vector3cd vc = eig.eigenvectors().col(k);
        if (vc.imag().norm() > 1e-9 * vc.norm())
            continue;
        const Eigen::Vector3d v = vc.real();
        const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
        if (cond > 0.0) {
            ++result.positive_constraint_count;
            const double lambda = std::abs(eig.eigenvalues()(k).real());
            if (lambda < best_lambda) {
                best_lambda = lambda;
                best = v;
            }
        }
    }
    if (result.positive_constraint_count == 0)
        throw DetectionError("DegenerateConfiguration", "no eigenvector satisfies the ellipse constraint");

    const Eigen::Vector3d lin = t * best;
    const double qa = best(0), qb = best(1), qc = best(2);
    const double qd = lin(0), qe = lin(1), qf = lin(2);
    const double s2inv = 1.0 / (s * s);

    ConicCoefficients cc;
    cc.a = qa * s2inv;
    cc.b = qb * s2inv;
    cc.c = qc * s2inv;
    cc.d = (-2.0 * qa * mx - qb * my) * s2inv + qd / s;
    cc.e = (-2.0 * qc * my - qb * mx) * s2inv + qe / s;
    cc.f = (qa * mx * mx + qb * mx * my + qc * my * my) * s2inv - (qd * mx + qe * my) / s + qf;

    double k = std::sqrt(cc.discriminant());
    if (cc.a < 0.0)
        k = -k;
    cc.a /= k;
    cc.b /= k;
    cc.c /= k;
    cc.d /= k;
    cc.e /= k;
    cc.f /= k;
    result.conic = cc;
    return result;
}

/// Fitted conic scaled so that 4ac - b^2 = 1 and a > 0.
inline ConicCoefficients fit_ellipse_direct(std::span<const Point2d> points)
{
    return fit_ellipse_direct_detailed(points).conic;
}

inline ConicCoefficients fit_ellipse_direct(std::span<const PixelCoord> pixels)
{
    std::vector<Point2d> pts;
    pts.reserve(pixels.size());
    for (const PixelCoord p : pixels)
        pts.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
    return fit_ellipse_direct(std::span<const Point2d>(pts));
}

inline double wrap_half_turn(double theta)
{
    constexpr double pi = std::numbers::pi;
    while (theta >= pi / 2.0)
        theta -= pi;
    while (theta < -pi / 2.0)
        theta += pi;
    return theta;
}

/// Geometric parameters of an ellipse-type conic.
inline Ellipse conic_to_ellipse(ConicCoefficients c)
{
    const double det = c.discriminant();
    if (!(det > 0.0))
        throw DetectionError("NotAnEllipse", "conic discriminant 4ac - b^2 is not positive");
    if (c.a < 0.0) {
        c.a = -c.a, c.b = -c.b, c.c = -c.c, c.d = -c.d, c.e = -c.e, c.f = -c.f;
    }

    Ellipse el;
    el.cx = (c.b * c.e - 2.0 * c.c * c.d) / det;
    el.cy = (c.b * c.d - 2.0 * c.a * c.e) / det;
    const double f0 = c.f + (c.d * el.cx + c.e * el.cy) / 2.0;
    if (!(f0 < 0.0))
        throw DetectionError("NotAnEllipse", "conic has no real points");

    const double mean = (c.a + c.c) / 2.0;
    const double spread = std::hypot((c.a - c.c) / 2.0, c.b / 2.0);
    const double lambda_small = mean - spread;
    const double lambda_large = mean + spread;
    el.a = std::sqrt(-f0 / lambda_small);
    el.b = std::sqrt(-f0 / lambda_large);
    if (spread <= 1e-12 * mean)
        el.theta = 0.0;
    else
        el.theta = wrap_half_turn(0.5 * std::atan2(c.b, c.a - c.c) + std::numbers::pi / 2.0);
    return el;
}

} // namespace pupil

#endif // PUPILBENCH_ELLIPSE_FIT_HPP
