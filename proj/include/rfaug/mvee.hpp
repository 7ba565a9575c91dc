// rfaug/mvee.hpp
//
// Minimum-volume enclosing ellipsoid and shell sampling around it.
//
// An ellipsoid is {z : ||A z + b|| <= 1} with A symmetric positive definite.
// fit_mvee runs Khachiyan's dual ascent on barycentric weights u over the
// lifted points q_i = [z_i; 1], with Todd-Yildirim away steps. It stops once
// every q_i^T X(u)^-1 q_i is within (n + 1)(1 + eps) of the bound, with eps
// chosen so that every input satisfies ||A z_i + b|| <= 1 + tol.
#pragma once

#include "rfaug/generative.hpp"
#include "rfaug/signal.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace rfaug::mvee {

using Point = Eigen::VectorXd;

struct Ellipsoid {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;

    std::size_t dim() const { return static_cast<std::size_t>(b.size()); }
    Eigen::VectorXd center() const;
    // log det A^-1, the log volume up to the unit-ball constant.
    double log_volume() const;
};

inline constexpr double default_tol = 1e-5;
inline constexpr std::size_t default_max_iterations = 100000;
// Added to the scatter matrix before inversion.
inline constexpr double scatter_ridge = 1e-9;

struct MveeResult {
    Ellipsoid ellipsoid;
    std::vector<double> weights;
    std::size_t iterations = 0;
    double max_norm = 0.0; // max_i ||A z_i + b||
    // log det X(u) after every iteration, starting from uniform weights.
    std::vector<double> dual_objective;
};

// Throws ConfigError for tol outside (0, 1e-2], Error("degenerate point
// cloud") for fewer than n + 1 points or a rank-deficient cloud, and
// Error("mvee not converged") after max_iterations.
MveeResult fit_mvee_detailed(const std::vector<Point>& points, double tol = default_tol,
                             std::size_t max_iterations = default_max_iterations);
Ellipsoid fit_mvee(const std::vector<Point>& points, double tol = default_tol);

double mahalanobis_norm(const Ellipsoid& e, const Point& z);
inline bool contains(const Ellipsoid& e, const Point& z)
{
    return mahalanobis_norm(e, z) <= 1.0;
}

struct ShellConfig {
    double delta = 0.2;
    std::size_t count = 0;

    // delta in (0, 10].
    void validate() const;
};

// count points with 1 < ||A z + b|| <= 1 + delta: a uniform direction u in
// the mapped space and a radius with density proportional to r^(n-1) on
// (1, 1 + delta], then z = A^-1 (r u - b). Point i uses its own substream.
std::vector<Point> sample_shell(const Ellipsoid& e, const ShellConfig& s, std::uint64_t seed);

std::vector<Point> to_points(const std::vector<std::vector<float>>& latents);
std::vector<std::vector<float>> from_points(const std::vector<Point>& points);

struct EllipsoidalGeneration {
    std::vector<SignalSample> samples;
    Ellipsoid ellipsoid;
    std::size_t mvee_iterations = 0;
    // Share of decoded samples whose re-encoding lies outside the ellipsoid.
    double outside_fraction = 0.0;
};

// Encodes X, fits the ellipsoid in latent space, samples `count` shell
// points and decodes them.
EllipsoidalGeneration generate_ellipsoidal_outliers(const gen::AEModel& ae, const std::vector<SignalSample>& xs,
                                                    double delta, std::size_t count, std::uint64_t seed,
                                                    double tol = default_tol);

} // namespace rfaug::mvee
