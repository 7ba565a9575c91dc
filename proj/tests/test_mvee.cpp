#include "rfaug/error.hpp"
#include "rfaug/mvee.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace rfaug;
using namespace rfaug::mvee;

namespace {

Point pt(std::initializer_list<double> v)
{
    Point p(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        p[i++] = x;
    return p;
}

std::vector<Point> random_cloud(std::size_t count, std::size_t dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Eigen::MatrixXd T(dim, dim);
    for (Eigen::Index i = 0; i < T.size(); ++i)
        T.data()[i] = nd(rng);
    T += 2.0 * Eigen::MatrixXd::Identity(dim, dim);
    std::vector<Point> out;
    for (std::size_t i = 0; i < count; ++i) {
        Point p(dim);
        for (auto& x : p)
            x = nd(rng);
        out.push_back(T * p);
    }
    return out;
}

Eigen::MatrixXd random_invertible(std::size_t dim, std::mt19937_64& rng)
{
    std::normal_distribution<double> nd;
    Eigen::MatrixXd T(dim, dim);
    for (Eigen::Index i = 0; i < T.size(); ++i)
        T.data()[i] = nd(rng);
    return T + 3.0 * Eigen::MatrixXd::Identity(dim, dim);
}

// Random containing ellipsoid: random SPD shape and a center near the cloud
// mean, scaled until every point is inside. Returns its log volume.
double random_containing_log_volume(const std::vector<Point>& pts, std::mt19937_64& rng)
{
    const auto n = pts.front().size();
    std::normal_distribution<double> nd;
    Eigen::MatrixXd G(n, n);
    for (Eigen::Index i = 0; i < G.size(); ++i)
        G.data()[i] = nd(rng);
    const Eigen::MatrixXd A = G * G.transpose() + 0.05 * Eigen::MatrixXd::Identity(n, n);
    Point mean = Point::Zero(n);
    for (const auto& p : pts)
        mean += p;
    mean /= static_cast<double>(pts.size());
    Point c = mean;
    for (auto& x : c)
        x += 0.3 * nd(rng);
    double worst = 0.0;
    for (const auto& p : pts)
        worst = std::max(worst, (A * (p - c)).norm());
    const Eigen::MatrixXd scaled = A / worst;
    return -std::log(scaled.determinant());
}

} // namespace

TEST_CASE("mvee of the symmetric diamond is the unit circle")
{
    const auto e = fit_mvee({pt({1, 0}), pt({-1, 0}), pt({0, 1}), pt({0, -1})});
    CHECK((e.A - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(e.b.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("mvee of the stretched diamond is axis aligned")
{
    const auto e = fit_mvee({pt({2, 0}), pt({-2, 0}), pt({0, 1}), pt({0, -1})});
    Eigen::Matrix2d expect;
    expect << 0.5, 0.0, 0.0, 1.0;
    CHECK((e.A - expect).cwiseAbs().maxCoeff() < 1e-4);
    CHECK(e.b.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("mvee contains every input on random clouds")
{
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t dim = trial % 2 ? 8 : 2;
        const auto pts = random_cloud(20 + static_cast<std::size_t>(trial) * 3, dim, rng);
        const auto r = fit_mvee_detailed(pts, 1e-5);
        double worst = 0.0;
        for (const auto& p : pts)
            worst = std::max(worst, mahalanobis_norm(r.ellipsoid, p));
        CHECK(worst <= 1.0 + 1e-5);
        CHECK(r.max_norm == doctest::Approx(worst));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r.ellipsoid.A);
        CHECK(eig.eigenvalues().minCoeff() > 1e-8);
        CHECK((r.ellipsoid.A - r.ellipsoid.A.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("mvee volume beats a randomized search over containing ellipsoids")
{
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto pts = random_cloud(12, 2, rng);
        const double ours = fit_mvee(pts, 1e-5).log_volume();
        double best = std::numeric_limits<double>::infinity();
        for (int c = 0; c < 10000; ++c)
            best = std::min(best, random_containing_log_volume(pts, rng));
        CHECK(ours <= best + 1e-5);
    }
}

TEST_CASE("dual objective is non-decreasing")
{
    std::mt19937_64 rng(5);
    const auto r = fit_mvee_detailed(random_cloud(300, 6, rng), 1e-6);
    REQUIRE(r.iterations > 10);
    REQUIRE(r.dual_objective.size() == r.iterations + 1);
    for (std::size_t i = 1; i < r.dual_objective.size(); ++i)
        CHECK(r.dual_objective[i] >= r.dual_objective[i - 1] - 1e-10);
    double total = 0.0;
    for (double w : r.weights) {
        CHECK(w >= 0.0);
        total += w;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("mvee is affine equivariant")
{
    std::mt19937_64 rng(31);
    for (std::size_t dim : {2, 5}) {
        const auto pts = random_cloud(40, dim, rng);
        const Eigen::MatrixXd T = random_invertible(dim, rng);
        const Point t = Point::Random(static_cast<Eigen::Index>(dim));
        std::vector<Point> moved;
        for (const auto& p : pts)
            moved.push_back(T * p + t);
        const auto e = fit_mvee(pts);
        const auto f = fit_mvee(moved);
        std::normal_distribution<double> nd;
        for (int probe = 0; probe < 200; ++probe) {
            Point z(dim);
            for (auto& x : z)
                x = 2.0 * nd(rng);
            CHECK(std::abs(mahalanobis_norm(e, z) - mahalanobis_norm(f, Point(T * z + t))) < 1e-6);
        }
    }
}

TEST_CASE("mahalanobis norm")
{
    Ellipsoid unit{Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()};
    CHECK(mahalanobis_norm(unit, pt({1, 0})) == doctest::Approx(1.0));
    CHECK(contains(unit, pt({1, 0})));
    CHECK_FALSE(contains(unit, pt({1, 0.01})));

    std::mt19937_64 rng(3);
    const auto e = fit_mvee(random_cloud(30, 3, rng));
    CHECK(mahalanobis_norm(e, e.center()) < 1e-9);
    CHECK_THROWS_AS(mahalanobis_norm(e, pt({1, 2})), Error);
}

TEST_CASE("degenerate clouds and bad tolerances are reported")
{
    CHECK_THROWS_WITH_AS(fit_mvee({pt({0, 0}), pt({1, 0})}), doctest::Contains("degenerate point cloud"), Error);
    CHECK_THROWS_WITH_AS(fit_mvee({pt({0, 0}), pt({1, 1}), pt({2, 2}), pt({3, 3})}),
                         doctest::Contains("degenerate point cloud"), Error);
    CHECK_THROWS_AS(fit_mvee({pt({1, 0}), pt({-1, 0}), pt({0, 1})}, 0.5), ConfigError);
    CHECK_THROWS_AS(fit_mvee({pt({1, 0}), pt({-1, 0}), pt({0, 1})}, 0.0), ConfigError);
}

TEST_CASE("mvee reports non-convergence")
{
    std::mt19937_64 rng(9);
    CHECK_THROWS_WITH_AS(fit_mvee_detailed(random_cloud(200, 6, rng), 1e-6, 3), doctest::Contains("not converged"),
                         Error);
}

TEST_CASE("shell samples lie strictly in the shell")
{
    std::mt19937_64 rng(41);
    const auto e = fit_mvee(random_cloud(50, 4, rng));
    const auto pts = sample_shell(e, {0.5, 100000}, 7);
    REQUIRE(pts.size() == 100000);
    std::size_t bad = 0;
    for (const auto& z : pts) {
        const double r = mahalanobis_norm(e, z);
        bad += !(r > 1.0 && r <= 1.5);
    }
    CHECK(bad == 0);
    CHECK(sample_shell(e, {0.5, 0}, 7).empty());
    CHECK_THROWS_AS(sample_shell(e, {0.0, 3}, 7), ConfigError);
    CHECK_THROWS_AS(sample_shell(e, {10.5, 3}, 7), ConfigError);
}

TEST_CASE("shell radial second moment matches the analytic value")
{
    // Density proportional to r on (1, 2]: E[r^2] = (int r^3) / (int r) = 2.5.
    const Ellipsoid unit{Eigen::Matrix2d::Identity(), Eigen::Vector2d::Zero()};
    const auto pts = sample_shell(unit, {1.0, 100000}, 11);
    double sum = 0.0;
    for (const auto& z : pts)
        sum += z.squaredNorm();
    const double oracle = (std::pow(2.0, 4) - 1.0) / 4.0 / ((std::pow(2.0, 2) - 1.0) / 2.0);
    CHECK(sum / static_cast<double>(pts.size()) == doctest::Approx(oracle).epsilon(0.02));
}

TEST_CASE("shell sampling is seeded per point")
{
    const Ellipsoid unit{Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero()};
    const auto a = sample_shell(unit, {0.3, 50}, 4);
    const auto b = sample_shell(unit, {0.3, 20}, 4);
    for (std::size_t i = 0; i < b.size(); ++i)
        CHECK(a[i] == b[i]);
    CHECK(sample_shell(unit, {0.3, 20}, 5)[0] != b[0]);
}
