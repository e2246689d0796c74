#include "superpack/family.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace superpack {

Vec3 family_system(Exponent p, double x, double y, double z)
{
    const auto f = family_system_t<double>(p.value(), x, y, z);
    return {f[0], f[1], f[2]};
}

FamilyMatrix<double> family_jacobian(Exponent p, double x, double y, double z)
{
    return family_jacobian_t<double>(p.value(), x, y, z);
}

bool in_family_region(double x, double y, double z, double slack)
{
    return y >= -slack && x - y >= -slack && z - x >= -slack && -x + y + z >= -slack;
}

Basis family_matrix(double x, double y, double z)
{
    Eigen::Matrix3d m;
    m << -x, y, z,
          z, -x, y,
          y, z, -x;
    return Basis(m);
}

Basis family_matrix(const FamilyPoint& pt)
{
    if (!in_family_region(pt.x, pt.y, pt.z, 1e-12)) {
        throw FamilyDomainError("family point outside z >= x >= y >= 0");
    }
    return family_matrix(pt.x, pt.y, pt.z);
}

double family_det(double x, double y, double z)
{
    return y * y * y + z * z * z - x * x * x + 3.0 * x * y * z;
}

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::converged:
        return "converged";
    case SolveStatus::singular_jacobian:
        return "singular-jacobian";
    case SolveStatus::left_region:
        return "left-region";
    case SolveStatus::max_iterations:
        return "max-iterations";
    }
    return "unknown";
}

namespace {

double sup_norm(const Vec3& v)
{
    return std::max({std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])});
}

}  // namespace

FamilySolve solve_family(Exponent p, const Vec3& start, const FamilySolveOptions& opts)
{
    const auto& [x0, y0, z0] = start;
    if (!(y0 > 0.0 && x0 - y0 > 0.0 && z0 - x0 > 0.0 && -x0 + y0 + z0 > 0.0)) {
        throw std::invalid_argument("solve_family: start must lie strictly inside z > x > y > 0");
    }
    FamilySolve out;
    Eigen::Vector3d v(x0, y0, z0);
    Vec3 f = family_system(p, v[0], v[1], v[2]);
    double res = sup_norm(f);

    for (int it = 0; it <= opts.max_iterations; ++it) {
        out.iterations = it;
        if (res <= opts.tol) {
            out.status = SolveStatus::converged;
            out.point = {p.value(), v[0], v[1], v[2], res};
            return out;
        }
        if (it == opts.max_iterations) {
            break;
        }
        const auto jac = family_jacobian(p, v[0], v[1], v[2]);
        Eigen::Matrix3d j;
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) {
                j(r, c) = jac[r][c];
            }
        }
        const Eigen::FullPivLU<Eigen::Matrix3d> lu(j);
        if (!lu.isInvertible() || lu.rcond() < 1e-15) {
            out.status = SolveStatus::singular_jacobian;
            out.point = {p.value(), v[0], v[1], v[2], res};
            return out;
        }
        const Eigen::Vector3d step = lu.solve(Eigen::Vector3d(f[0], f[1], f[2]));

        // Backtrack until the iterate stays in the region and the residual drops.
        double t = 1.0;
        bool accepted = false;
        bool any_inside = false;
        for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
            const Eigen::Vector3d cand = v - t * step;
            if (!in_family_region(cand[0], cand[1], cand[2])) {
                continue;
            }
            any_inside = true;
            const Vec3 fc = family_system(p, cand[0], cand[1], cand[2]);
            const double rc = sup_norm(fc);
            if (rc < res) {
                v = cand;
                f = fc;
                res = rc;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            out.status = any_inside ? SolveStatus::max_iterations : SolveStatus::left_region;
            out.point = {p.value(), v[0], v[1], v[2], res};
            return out;
        }
    }
    out.status = SolveStatus::max_iterations;
    out.point = {p.value(), v[0], v[1], v[2], res};
    return out;
}

namespace {

FamilyPoint endpoint_point(double p)
{
    const auto f = family_system(Exponent(p), 0.5, 0.5, 0.5);
    return {p, 0.5, 0.5, 0.5, sup_norm(f)};
}

bool strictly_inside(const Vec3& v)
{
    return v[1] > 0.0 && v[0] - v[1] > 0.0 && v[2] - v[0] > 0.0 && -v[0] + v[1] + v[2] > 0.0;
}

}  // namespace

std::vector<std::optional<FamilyPoint>> continue_family(const std::vector<double>& p_values,
                                                        double initial_step)
{
    std::vector<std::optional<FamilyPoint>> out(p_values.size());
    std::vector<std::size_t> order(p_values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return p_values[a] < p_values[b]; });

    FamilySolve first = solve_family(Exponent(1.0), {0.3, 0.2, 0.5});
    if (!first.ok()) {
        return out;
    }
    FamilyPoint cur = first.point;
    std::optional<FamilyPoint> prev;
    double step = initial_step;
    constexpr double kMinStep = 1e-15;

    for (std::size_t idx : order) {
        const double target = p_values[idx];
        if (target < 1.0 || target > kLog2Of3) {
            continue;
        }
        if (target > kFamilyContinuationEnd) {
            out[idx] = endpoint_point(target);
            continue;
        }
        bool failed = false;
        while (cur.p < target) {
            const double next_p = target - cur.p <= step ? target : cur.p + step;
            Vec3 guess{cur.x, cur.y, cur.z};
            if (prev && cur.p > prev->p) {
                // Secant predictor along the solution curve.
                const double s = (next_p - cur.p) / (cur.p - prev->p);
                const Vec3 pred{cur.x + s * (cur.x - prev->x), cur.y + s * (cur.y - prev->y),
                                cur.z + s * (cur.z - prev->z)};
                if (strictly_inside(pred)) {
                    guess = pred;
                }
            }
            FamilySolve sol{};
            if (strictly_inside(guess)) {
                sol = solve_family(Exponent(next_p), guess);
            }
            if (sol.ok()) {
                prev = cur;
                cur = sol.point;
                step = std::min(initial_step, 2.0 * step);
            } else {
                step *= 0.5;
                if (step < kMinStep) {
                    failed = true;
                    break;
                }
            }
        }
        if (failed) {
            break;
        }
        out[idx] = cur;
    }
    return out;
}

std::optional<FamilyPoint> family_point_at(double p)
{
    return continue_family({p}).front();
}

std::vector<FamilyRow> family_table(const std::vector<double>& p_values)
{
    const auto points = continue_family(p_values);
    std::vector<FamilyRow> rows;
    rows.reserve(p_values.size());
    for (std::size_t i = 0; i < p_values.size(); ++i) {
        FamilyRow row;
        row.p = p_values[i];
        if (p_values[i] < 1.0 || p_values[i] > kLog2Of3) {
            row.status = "out-of-range";
        } else if (!points[i]) {
            row.status = "solve-failed";
        } else {
            const FamilyPoint& pt = *points[i];
            row.ok = true;
            row.point = pt;
            row.det = family_det(pt.x, pt.y, pt.z);
            row.density = superball_volume(Exponent(pt.p), 0.5) / row.det;
            row.neighbors = count_neighbors(family_matrix(pt), Exponent(pt.p), kDefaultTol);
            row.status = "ok";
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace superpack
