#include "superpack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace superpack {

Exponent::Exponent(double p) : p_(p)
{
    if (!std::isfinite(p) || p < 1.0) {
        throw std::domain_error("exponent must be finite and >= 1, got " + std::to_string(p));
    }
}

double abs_pow(double t, double p)
{
    const double a = std::fabs(t);
    if (a == 0.0) {
        return 0.0;
    }
    if (p == 1.0) {
        return a;
    }
    if (p == 2.0) {
        return a * a;
    }
    return std::pow(a, p);
}

double lp_norm(std::span<const double> v, Exponent p)
{
    // Scale by the largest entry so |v_i|^p cannot overflow or underflow.
    const double m = linf_norm(v);
    if (m == 0.0) {
        return 0.0;
    }
    if (p.value() == 1.0) {
        double s = 0.0;
        for (double t : v) {
            s += std::fabs(t);
        }
        return s;
    }
    double s = 0.0;
    for (double t : v) {
        s += abs_pow(t / m, p);
    }
    return m * std::pow(s, 1.0 / p.value());
}

double lp_norm_pow(const Vec3& v, Exponent p)
{
    return abs_pow(v[0], p) + abs_pow(v[1], p) + abs_pow(v[2], p);
}

double linf_norm(std::span<const double> v)
{
    double m = 0.0;
    for (double t : v) {
        m = std::max(m, std::fabs(t));
    }
    return m;
}

double conjugate_exponent(Exponent p)
{
    if (p.value() == 1.0) {
        return std::numeric_limits<double>::infinity();
    }
    return p.value() / (p.value() - 1.0);
}

double dual_norm(std::span<const double> v, double q)
{
    if (std::isinf(q)) {
        return linf_norm(v);
    }
    return lp_norm(v, Exponent(q));
}

double gamma_fn(double x)
{
    if (!(x > 0.0)) {
        throw std::domain_error("gamma_fn: argument must be positive");
    }
    return std::tgamma(x);
}

double superball_volume(Exponent p, double scale)
{
    if (!(scale > 0.0)) {
        throw std::domain_error("superball_volume: scale must be positive");
    }
    const double g = gamma_fn(1.0 + 1.0 / p.value());
    const double side = 2.0 * scale;
    return side * side * side * g * g * g / gamma_fn(1.0 + 3.0 / p.value());
}

}  // namespace superpack
