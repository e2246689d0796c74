#include "superpack/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace superpack {

namespace {

constexpr double kKinkThreshold = 1e-12;

double sign_of(double t)
{
    return t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
}

// d/dt |t|^p = p sign(t) |t|^(p-1)
double first_derivative(double t, double p)
{
    if (t == 0.0) {
        return 0.0;
    }
    return p * sign_of(t) * std::pow(std::fabs(t), p - 1.0);
}

// d^2/dt^2 |t|^p = p (p-1) |t|^(p-2); unbounded at 0 for 1 < p < 2.
double second_derivative(double t, double p)
{
    if (p == 1.0) {
        return 0.0;
    }
    if (p == 2.0) {
        return 2.0;
    }
    const double a = std::fabs(t);
    if (a < kKinkThreshold) {
        return p < 2.0 ? 0.0 : p * (p - 1.0) * std::pow(a, p - 2.0);
    }
    return p * (p - 1.0) * std::pow(a, p - 2.0);
}

double sup_norm(const Eigen::VectorXd& v)
{
    return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<double> constraint_residuals(const Basis& b, const NeighborCase& nc, Exponent p)
{
    std::vector<double> r;
    r.reserve(nc.representatives.size());
    for (const auto& u : nc.representatives) {
        r.push_back(lp_norm_pow(b.apply(u), p) - 1.0);
    }
    return r;
}

Eigen::Matrix3d cofactor(const Eigen::Matrix3d& b)
{
    Eigen::Matrix3d c;
    for (int i = 0; i < 3; ++i) {
        const int i1 = (i + 1) % 3;
        const int i2 = (i + 2) % 3;
        for (int k = 0; k < 3; ++k) {
            const int k1 = (k + 1) % 3;
            const int k2 = (k + 2) % 3;
            c(i, k) = b(i1, k1) * b(i2, k2) - b(i1, k2) * b(i2, k1);
        }
    }
    return c;
}

namespace {

Eigen::Vector3d apply(const Eigen::Matrix3d& b, const IntVec3& u)
{
    return b * Eigen::Vector3d(u[0], u[1], u[2]);
}

// Gradient of ||B u||_p^p with respect to B (row-major, 9 entries).
Eigen::Matrix<double, 9, 1> constraint_gradient(const Eigen::Matrix3d& b, const IntVec3& u, double p)
{
    const Eigen::Vector3d r = apply(b, u);
    Eigen::Matrix<double, 9, 1> g;
    for (int i = 0; i < 3; ++i) {
        const double d = first_derivative(r[i], p);
        for (int k = 0; k < 3; ++k) {
            g[3 * i + k] = d * u[k];
        }
    }
    return g;
}

}  // namespace

StationarityEval stationarity_system(const Eigen::Matrix3d& b, const Eigen::VectorXd& multipliers,
                                     const NeighborCase& nc, Exponent p)
{
    const auto m = static_cast<Eigen::Index>(nc.representatives.size());
    if (multipliers.size() != m) {
        throw std::invalid_argument("stationarity_system: multiplier count does not match the case");
    }
    StationarityEval out;
    out.values.resize(9 + m);
    const Eigen::Matrix3d cof = cofactor(b);
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            out.values[3 * i + k] = cof(i, k);
        }
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        const IntVec3& u = nc.representatives[j];
        out.values.head<9>() -= multipliers[j] * constraint_gradient(b, u, p);
        const Eigen::Vector3d r = apply(b, u);
        double s = 0.0;
        for (int i = 0; i < 3; ++i) {
            s += abs_pow(r[i], p);
            if (p.value() < 2.0 && std::fabs(r[i]) < kKinkThreshold) {
                out.kink = true;
            }
        }
        out.values[9 + j] = s - 1.0;
    }
    return out;
}

Eigen::MatrixXd stationarity_jacobian(const Eigen::Matrix3d& b, const Eigen::VectorXd& multipliers,
                                      const NeighborCase& nc, Exponent p)
{
    const auto m = static_cast<Eigen::Index>(nc.representatives.size());
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(9 + m, 9 + m);

    // Hessian of det: C(i,k) = b(i1,k1) b(i2,k2) - b(i1,k2) b(i2,k1).
    for (int i = 0; i < 3; ++i) {
        const int i1 = (i + 1) % 3;
        const int i2 = (i + 2) % 3;
        for (int k = 0; k < 3; ++k) {
            const int k1 = (k + 1) % 3;
            const int k2 = (k + 2) % 3;
            const int row = 3 * i + k;
            jac(row, 3 * i1 + k1) += b(i2, k2);
            jac(row, 3 * i2 + k2) += b(i1, k1);
            jac(row, 3 * i1 + k2) -= b(i2, k1);
            jac(row, 3 * i2 + k1) -= b(i1, k2);
        }
    }

    for (Eigen::Index j = 0; j < m; ++j) {
        const IntVec3& u = nc.representatives[j];
        const Eigen::Vector3d r = apply(b, u);
        const auto grad = constraint_gradient(b, u, p);
        jac.block(0, 9 + j, 9, 1) = -grad;
        jac.block(9 + j, 0, 1, 9) = grad.transpose();
        for (int i = 0; i < 3; ++i) {
            const double h = multipliers[j] * second_derivative(r[i], p);
            if (h == 0.0) {
                continue;
            }
            for (int k = 0; k < 3; ++k) {
                for (int l = 0; l < 3; ++l) {
                    jac(3 * i + k, 3 * i + l) -= h * u[k] * u[l];
                }
            }
        }
    }
    return jac;
}

Eigen::VectorXd initial_multipliers(const Eigen::Matrix3d& b, const NeighborCase& nc, Exponent p)
{
    const auto m = static_cast<Eigen::Index>(nc.representatives.size());
    Eigen::MatrixXd a(9, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        a.col(j) = constraint_gradient(b, nc.representatives[j], p);
    }
    const Eigen::Matrix3d cof = cofactor(b);
    Eigen::Matrix<double, 9, 1> rhs;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            rhs[3 * i + k] = cof(i, k);
        }
    }
    return a.completeOrthogonalDecomposition().solve(rhs);
}

std::string to_string(NewtonStatus s)
{
    switch (s) {
    case NewtonStatus::converged:
        return "converged";
    case NewtonStatus::max_iterations:
        return "max-iterations";
    case NewtonStatus::singular_jacobian:
        return "singular-jacobian";
    case NewtonStatus::left_region:
        return "left-region";
    case NewtonStatus::kink:
        return "kink";
    case NewtonStatus::line_search_failed:
        return "line-search-failed";
    case NewtonStatus::nonpositive_det:
        return "nonpositive-det";
    }
    return "unknown";
}

namespace {

Eigen::Matrix3d unpack(const Eigen::VectorXd& z)
{
    Eigen::Matrix3d b;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            b(i, k) = z[3 * i + k];
        }
    }
    return b;
}

}  // namespace

NewtonResult newton_solve(const Basis& start, const NeighborCase& nc, Exponent p, const SearchConfig& cfg)
{
    Eigen::Matrix3d b0 = start.matrix();
    if (!(std::fabs(b0.determinant()) >= cfg.min_abs_det)) {
        throw std::invalid_argument("newton_solve: |det| of the start is below min_abs_det");
    }
    if (b0.determinant() < 0.0) {
        b0 = -b0;
    }
    double longest = 0.0;
    for (const auto& u : nc.representatives) {
        longest = std::max(longest, lp_norm(Basis(b0).apply(u), p));
    }
    b0 /= longest;

    const auto m = static_cast<Eigen::Index>(nc.representatives.size());
    Eigen::VectorXd z(9 + m);
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            z[3 * i + k] = b0(i, k);
        }
    }
    z.tail(m) = initial_multipliers(b0, nc, p);

    NewtonResult out;
    auto eval = stationarity_system(b0, z.tail(m), nc, p);
    double res = sup_norm(eval.values);

    for (int it = 0;; ++it) {
        out.iterations = it;
        out.residual = res;
        if (res <= cfg.newton_tol) {
            break;
        }
        if (it >= cfg.max_iterations) {
            out.status = NewtonStatus::max_iterations;
            return out;
        }
        if (eval.kink) {
            out.status = NewtonStatus::kink;
            return out;
        }
        const Eigen::MatrixXd jac = stationarity_jacobian(unpack(z), z.tail(m), nc, p);
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
        Eigen::VectorXd step;
        if (lu.isInvertible() && lu.rcond() >= 1e-14) {
            step = lu.solve(eval.values);
        } else {
            // Critical points are not isolated when the problem has a
            // continuous symmetry (rotations at p = 2): take the
            // minimum-norm step instead.
            Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
            cod.setThreshold(1e-10);
            cod.compute(jac);
            if (cod.rank() == 0) {
                out.status = NewtonStatus::singular_jacobian;
                return out;
            }
            step = cod.solve(eval.values);
            if (!step.allFinite()) {
                out.status = NewtonStatus::singular_jacobian;
                return out;
            }
        }

        double t = 1.0;
        bool accepted = false;
        bool det_ok_seen = false;
        for (int h = 0; h <= 30; ++h, t *= 0.5) {
            const Eigen::VectorXd cand = z - t * step;
            const Eigen::Matrix3d bc = unpack(cand);
            if (std::fabs(bc.determinant()) < cfg.min_abs_det) {
                continue;
            }
            det_ok_seen = true;
            auto ec = stationarity_system(bc, cand.tail(m), nc, p);
            const double rc = sup_norm(ec.values);
            if (rc <= (1.0 - 1e-4 * t) * res) {
                z = cand;
                eval = std::move(ec);
                res = rc;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.status = det_ok_seen ? NewtonStatus::line_search_failed : NewtonStatus::left_region;
            return out;
        }
    }

    const Eigen::Matrix3d bf = unpack(z);
    if (!(bf.determinant() > 0.0)) {
        out.status = NewtonStatus::nonpositive_det;
        return out;
    }
    CriticalPoint cp{Basis(bf), nc.id, {}, res, 0.0, false, 0};
    cp.multipliers.assign(z.tail(m).data(), z.tail(m).data() + m);
    cp.density = density(cp.basis, p);
    const auto rep = verify_packing(cp.basis, p, kDefaultTol);
    cp.verified = rep.is_packing;
    if (cp.verified) {
        cp.neighbors = count_neighbors(cp.basis, p, kDefaultTol);
    }
    out.status = NewtonStatus::converged;
    out.point = std::move(cp);
    return out;
}

Eigen::Matrix3d random_start(std::uint64_t seed, int index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Matrix3d b;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            b(i, k) = normal(rng);
        }
    }
    return b;
}

std::vector<CriticalPoint> random_search(const NeighborCase& nc, Exponent p, const SearchConfig& cfg)
{
    if (cfg.restarts < 1) {
        throw std::invalid_argument("random_search: restarts must be >= 1");
    }
    if (!(cfg.newton_tol > 0.0)) {
        throw std::invalid_argument("random_search: newton_tol must be positive");
    }
    std::vector<std::optional<CriticalPoint>> found(static_cast<std::size_t>(cfg.restarts));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < cfg.restarts; i = next++) {
            const Eigen::Matrix3d start = random_start(cfg.seed, i);
            if (std::fabs(start.determinant()) < cfg.min_abs_det) {
                continue;
            }
            auto res = newton_solve(Basis(start), nc, p, cfg);
            if (res.ok() && res.point->verified) {
                found[static_cast<std::size_t>(i)] = std::move(res.point);
            }
        }
    };
    const int jobs = std::max(1, cfg.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < jobs; ++t) {
            pool.emplace_back(worker);
        }
    }

    std::vector<CriticalPoint> all;
    for (auto& f : found) {
        if (f) {
            all.push_back(std::move(*f));
        }
    }
    // Stable sort keeps restart order among equal densities.
    std::stable_sort(all.begin(), all.end(),
                     [](const CriticalPoint& a, const CriticalPoint& b) { return a.density > b.density; });
    std::vector<CriticalPoint> unique;
    for (auto& cp : all) {
        if (unique.empty() || unique.back().density - cp.density > 1e-7) {
            unique.push_back(std::move(cp));
        }
    }
    return unique;
}

}  // namespace superpack
