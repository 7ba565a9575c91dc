#include "rfaug/mvee.hpp"

#include "rfaug/error.hpp"
#include "rfaug/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <sstream>

namespace rfaug::mvee {

namespace {

// Incremental updates drift; every so often X^-1 and M are rebuilt.
constexpr std::size_t refresh_interval = 1000;
constexpr double rank_tolerance = 1e-12;

struct DualState {
    Eigen::MatrixXd X_inv;
    Eigen::VectorXd M; // M_i = q_i^T X^-1 q_i
    double log_det = 0.0;
};

DualState rebuild(const Eigen::MatrixXd& Q, const std::vector<double>& u)
{
    const auto d = Q.rows();
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < Q.cols(); ++i)
        if (u[static_cast<std::size_t>(i)] > 0.0)
            X.selfadjointView<Eigen::Lower>().rankUpdate(Q.col(i), u[static_cast<std::size_t>(i)]);
    X = X.selfadjointView<Eigen::Lower>();
    Eigen::LLT<Eigen::MatrixXd> llt(X);
    if (llt.info() != Eigen::Success)
        throw Error("degenerate point cloud: weighted scatter lost positive definiteness");
    DualState s;
    s.X_inv = llt.solve(Eigen::MatrixXd::Identity(d, d));
    s.M = (Q.array() * (s.X_inv * Q).array()).colwise().sum().transpose();
    const Eigen::MatrixXd L = llt.matrixL();
    s.log_det = 2.0 * L.diagonal().array().log().sum();
    return s;
}

Eigen::MatrixXd spd_power(const Eigen::MatrixXd& S, double power)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    const Eigen::VectorXd lam = eig.eigenvalues().array().pow(power);
    return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

} // namespace

Eigen::VectorXd Ellipsoid::center() const
{
    return -A.llt().solve(b);
}

double Ellipsoid::log_volume() const
{
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    const Eigen::MatrixXd L = llt.matrixL();
    return -2.0 * L.diagonal().array().log().sum();
}

MveeResult fit_mvee_detailed(const std::vector<Point>& points, double tol, std::size_t max_iterations)
{
    if (!(tol > 0.0 && tol <= 1e-2))
        throw ConfigError("mvee tolerance must be in (0, 1e-2], got " + std::to_string(tol));
    if (points.empty())
        throw Error("degenerate point cloud: no points");
    const std::size_t n = static_cast<std::size_t>(points.front().size());
    if (n == 0)
        throw ConfigError("mvee points must have at least one dimension");
    for (const auto& p : points) {
        if (static_cast<std::size_t>(p.size()) != n)
            throw ConfigError("mvee points have mixed dimensions");
        if (!p.allFinite())
            throw Error("mvee point is not finite");
    }
    const std::size_t m = points.size();
    if (m < n + 1)
        throw Error("degenerate point cloud: " + std::to_string(m) + " points cannot span " + std::to_string(n) +
                    " dimensions");

    const auto d = static_cast<Eigen::Index>(n + 1);
    const double dd = static_cast<double>(n + 1);
    Eigen::MatrixXd Q(d, static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        Q.col(static_cast<Eigen::Index>(i)).head(static_cast<Eigen::Index>(n)) = points[i];
        Q(d - 1, static_cast<Eigen::Index>(i)) = 1.0;
    }

    // Rank check on the lifted second moment under uniform weights.
    {
        const Eigen::MatrixXd X = Q * Q.transpose() / static_cast<double>(m);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(X, Eigen::EigenvaluesOnly);
        const double hi = eig.eigenvalues().maxCoeff();
        const double lo = eig.eigenvalues().minCoeff();
        if (!(hi > 0.0) || lo <= rank_tolerance * hi) {
            std::ostringstream os;
            os << "degenerate point cloud: lifted scatter has eigenvalue ratio " << (hi > 0.0 ? lo / hi : 0.0);
            throw Error(os.str());
        }
    }

    // ||A z + b||^2 = (M_i - 1) / n, so M_i <= d (1 + eps) bounds the norm by
    // sqrt(1 + 2 tol) <= 1 + tol.
    const double eps = 2.0 * tol * static_cast<double>(n) / dd;
    const double bound = dd * (1.0 + eps);

    MveeResult r;
    std::vector<double> u(m, 1.0 / static_cast<double>(m));
    DualState s = rebuild(Q, u);
    r.dual_objective.push_back(s.log_det);
    std::size_t since_refresh = 0;

    for (;;) {
        Eigen::Index j = 0;
        const double kappa = s.M.maxCoeff(&j);
        if (kappa <= bound) {
            if (since_refresh == 0)
                break;
            s = rebuild(Q, u); // confirm on fresh values
            since_refresh = 0;
            continue;
        }
        if (r.iterations >= max_iterations) {
            std::ostringstream os;
            os << "mvee not converged after " << max_iterations << " iterations: max norm "
               << std::sqrt(std::max(0.0, (kappa - 1.0) / static_cast<double>(n))) << " (tolerance " << tol << ")";
            throw Error(os.str());
        }

        Eigen::Index k = -1;
        double mk = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m; ++i)
            if (u[i] > 0.0 && s.M[static_cast<Eigen::Index>(i)] < mk) {
                mk = s.M[static_cast<Eigen::Index>(i)];
                k = static_cast<Eigen::Index>(i);
            }

        if (kappa - dd >= dd - mk) {
            const double alpha = (kappa - dd) / (dd * (kappa - 1.0));
            const Eigen::VectorXd v = s.X_inv * Q.col(j);
            const Eigen::VectorXd w = Q.transpose() * v;
            const double denom = (1.0 - alpha) + alpha * kappa;
            s.M = (s.M - (alpha / denom) * w.array().square().matrix()) / (1.0 - alpha);
            s.X_inv = (s.X_inv - (alpha / denom) * v * v.transpose()) / (1.0 - alpha);
            s.log_det += dd * std::log1p(-alpha) + std::log1p(alpha * kappa / (1.0 - alpha));
            for (auto& x : u)
                x *= 1.0 - alpha;
            u[static_cast<std::size_t>(j)] += alpha;
        } else {
            const auto uk = u[static_cast<std::size_t>(k)];
            const double beta = std::min((dd - mk) / (dd * (mk - 1.0)), uk / (1.0 - uk));
            const double a = 1.0 + beta;
            const Eigen::VectorXd v = s.X_inv * Q.col(k);
            const Eigen::VectorXd w = Q.transpose() * v;
            const double denom = a - beta * mk;
            s.M = (s.M + (beta / denom) * w.array().square().matrix()) / a;
            s.X_inv = (s.X_inv + (beta / denom) * v * v.transpose()) / a;
            s.log_det += dd * std::log(a) + std::log1p(-beta * mk / a);
            for (auto& x : u)
                x *= a;
            u[static_cast<std::size_t>(k)] -= beta;
            if (u[static_cast<std::size_t>(k)] < 1e-15)
                u[static_cast<std::size_t>(k)] = 0.0;
        }
        ++r.iterations;
        if (++since_refresh >= refresh_interval) {
            s = rebuild(Q, u);
            since_refresh = 0;
        }
        r.dual_objective.push_back(s.log_det);
    }

    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(nn);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nn, nn);
    for (std::size_t i = 0; i < m; ++i) {
        c += u[i] * points[i];
        S.selfadjointView<Eigen::Lower>().rankUpdate(points[i], u[i]);
    }
    S = S.selfadjointView<Eigen::Lower>();
    S -= c * c.transpose();
    S += scatter_ridge * Eigen::MatrixXd::Identity(nn, nn);
    // A = M^(1/2) with M = S^-1 / n.
    r.ellipsoid.A = spd_power(S * static_cast<double>(n), -0.5);
    r.ellipsoid.A = 0.5 * (r.ellipsoid.A + r.ellipsoid.A.transpose());
    r.ellipsoid.b = -r.ellipsoid.A * c;
    for (const auto& p : points)
        r.max_norm = std::max(r.max_norm, mahalanobis_norm(r.ellipsoid, p));
    r.weights = std::move(u);
    return r;
}

Ellipsoid fit_mvee(const std::vector<Point>& points, double tol)
{
    return fit_mvee_detailed(points, tol).ellipsoid;
}

double mahalanobis_norm(const Ellipsoid& e, const Point& z)
{
    if (z.size() != e.b.size())
        throw Error("dimension mismatch: point of size " + std::to_string(z.size()) + " for a " +
                    std::to_string(e.b.size()) + "-dimensional ellipsoid");
    return (e.A * z + e.b).norm();
}

void ShellConfig::validate() const
{
    if (!(delta > 0.0 && delta <= 10.0))
        throw ConfigError("shell delta must be in (0, 10], got " + std::to_string(delta));
}

std::vector<Point> sample_shell(const Ellipsoid& e, const ShellConfig& s, std::uint64_t seed)
{
    s.validate();
    const auto n = static_cast<Eigen::Index>(e.dim());
    std::vector<Point> out(s.count);
    if (s.count == 0)
        return out;
    const Eigen::MatrixXd A_inv = spd_power(e.A, -1.0);
    const double dn = static_cast<double>(n);
    const double outer_pow = std::pow(1.0 + s.delta, dn);
    const std::uint64_t base = derive_seed(seed, stream::shell);
    const long count = static_cast<long>(s.count);

#pragma omp parallel for schedule(static)
    for (long i = 0; i < count; ++i) {
        Rng rng = substream(base, static_cast<std::uint64_t>(i));
        std::normal_distribution<double> nd;
        std::uniform_real_distribution<double> ud;
        for (;;) {
            Eigen::VectorXd dir(n);
            for (Eigen::Index k = 0; k < n; ++k)
                dir[k] = nd(rng);
            const double len = dir.norm();
            if (!(len > 0.0))
                continue;
            const double r = std::pow(1.0 + ud(rng) * (outer_pow - 1.0), 1.0 / dn);
            Eigen::VectorXd z = A_inv * (r / len * dir - e.b);
            const double norm = (e.A * z + e.b).norm();
            // Round-off can push a point at either boundary out of (1, 1 + delta].
            if (norm > 1.0 && norm <= 1.0 + s.delta) {
                out[static_cast<std::size_t>(i)] = std::move(z);
                break;
            }
        }
    }
    return out;
}

std::vector<Point> to_points(const std::vector<std::vector<float>>& latents)
{
    std::vector<Point> out;
    out.reserve(latents.size());
    for (const auto& z : latents)
        out.push_back(Eigen::Map<const Eigen::VectorXf>(z.data(), static_cast<Eigen::Index>(z.size())).cast<double>());
    return out;
}

std::vector<std::vector<float>> from_points(const std::vector<Point>& points)
{
    std::vector<std::vector<float>> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        std::vector<float> z(static_cast<std::size_t>(p.size()));
        for (Eigen::Index k = 0; k < p.size(); ++k)
            z[static_cast<std::size_t>(k)] = static_cast<float>(p[k]);
        out.push_back(std::move(z));
    }
    return out;
}

EllipsoidalGeneration generate_ellipsoidal_outliers(const gen::AEModel& ae, const std::vector<SignalSample>& xs,
                                                    double delta, std::size_t count, std::uint64_t seed, double tol)
{
    ShellConfig shell{delta, count};
    shell.validate();
    if (xs.size() < ae.latent_dim + 1)
        throw ConfigError("ellipsoidal generation needs at least latent_dim + 1 samples, got " +
                          std::to_string(xs.size()));
    const auto fit = fit_mvee_detailed(to_points(gen::encode(ae, xs)), tol);
    EllipsoidalGeneration g;
    g.ellipsoid = fit.ellipsoid;
    g.mvee_iterations = fit.iterations;
    if (count == 0)
        return g;
    g.samples = gen::decode(ae, from_points(sample_shell(g.ellipsoid, shell, seed)));
    const auto back = to_points(gen::encode(ae, g.samples));
    std::size_t outside = 0;
    for (const auto& z : back)
        outside += mahalanobis_norm(g.ellipsoid, z) > 1.0;
    g.outside_fraction = static_cast<double>(outside) / static_cast<double>(back.size());
    return g;
}

} // namespace rfaug::mvee
