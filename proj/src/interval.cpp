#include "superpack/interval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace superpack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Below this magnitude FMA residuals may be inexact (subnormal range).
constexpr double kTiny = 0x1p-968;

double down(double v) { return std::nextafter(v, -kInf); }
double up(double v) { return std::nextafter(v, kInf); }

// Lower and upper enclosure of an exact value r + err, where err is the
// exact rounding error of r (err has the sign of exact - r).
double lower_of(double r, double err, bool exact_err = true)
{
    if (!exact_err) {
        return down(r);
    }
    return err < 0.0 ? down(r) : r;
}

double upper_of(double r, double err, bool exact_err = true)
{
    if (!exact_err) {
        return up(r);
    }
    return err > 0.0 ? up(r) : r;
}

// TwoSum is exact for all finite inputs; FMA residuals of products and
// quotients are only guaranteed exact away from the subnormal range.
bool residual_exact(double r, double a, double b)
{
    return std::fabs(r) >= kTiny || a == 0.0 || b == 0.0;
}

double two_sum_err(double a, double b, double s)
{
    const double bb = s - a;
    return (a - (s - bb)) + (b - bb);
}

double add_lo(double a, double b)
{
    const double s = a + b;
    return lower_of(s, two_sum_err(a, b, s));
}

double add_hi(double a, double b)
{
    const double s = a + b;
    return upper_of(s, two_sum_err(a, b, s));
}

double mul_lo(double a, double b)
{
    const double r = a * b;
    return lower_of(r, std::fma(a, b, -r), residual_exact(r, a, b));
}

double mul_hi(double a, double b)
{
    const double r = a * b;
    return upper_of(r, std::fma(a, b, -r), residual_exact(r, a, b));
}

// Sign of (a - r*b) matches sign of (a/b - r) times sign(b).
double div_lo(double a, double b)
{
    const double r = a / b;
    const double res = std::fma(-r, b, a);
    return lower_of(r, b > 0.0 ? res : -res, residual_exact(r, a, 1.0));
}

double div_hi(double a, double b)
{
    const double r = a / b;
    const double res = std::fma(-r, b, a);
    return upper_of(r, b > 0.0 ? res : -res, residual_exact(r, a, 1.0));
}

void check_finite(double lo, double hi)
{
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        throw IntervalError("interval overflow or NaN");
    }
}

}  // namespace

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi)
{
    if (!(lo <= hi)) {
        throw IntervalError("interval requires lo <= hi");
    }
    check_finite(lo, hi);
}

std::string Interval::str() const
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "[%.17g,%.17g]", lo_, hi_);
    return buf;
}

Interval operator+(const Interval& a, const Interval& b)
{
    return {add_lo(a.lo(), b.lo()), add_hi(a.hi(), b.hi())};
}

Interval operator-(const Interval& a, const Interval& b)
{
    return {add_lo(a.lo(), -b.hi()), add_hi(a.hi(), -b.lo())};
}

Interval operator-(const Interval& a)
{
    return {-a.hi(), -a.lo()};
}

Interval operator*(const Interval& a, const Interval& b)
{
    const std::array<std::pair<double, double>, 4> corners{
        {{a.lo(), b.lo()}, {a.lo(), b.hi()}, {a.hi(), b.lo()}, {a.hi(), b.hi()}}};
    double lo = kInf;
    double hi = -kInf;
    for (const auto& [x, y] : corners) {
        lo = std::min(lo, mul_lo(x, y));
        hi = std::max(hi, mul_hi(x, y));
    }
    return {lo, hi};
}

Interval operator/(const Interval& a, const Interval& b)
{
    if (b.contains_zero()) {
        throw IntervalError("division by an interval containing zero");
    }
    const std::array<std::pair<double, double>, 4> corners{
        {{a.lo(), b.lo()}, {a.lo(), b.hi()}, {a.hi(), b.lo()}, {a.hi(), b.hi()}}};
    double lo = kInf;
    double hi = -kInf;
    for (const auto& [x, y] : corners) {
        lo = std::min(lo, div_lo(x, y));
        hi = std::max(hi, div_hi(x, y));
    }
    return {lo, hi};
}

Interval abs_val(const Interval& a)
{
    if (a.lo() >= 0.0) {
        return a;
    }
    if (a.hi() <= 0.0) {
        return -a;
    }
    return {0.0, std::max(-a.lo(), a.hi())};
}

Interval max(const Interval& a, const Interval& b)
{
    return {std::max(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

Interval hull(const Interval& a, const Interval& b)
{
    return {std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi())};
}

namespace {

constexpr double kPowSlack = 0x1p-50;

// Enclosure of b^e for a single point (b, e), b >= 0, e >= 0.
std::pair<double, double> pow_point(double b, double e)
{
    if (e == 0.0 || b == 1.0) {
        return {1.0, 1.0};
    }
    if (b == 0.0) {
        return {0.0, 0.0};
    }
    if (e == 1.0) {
        return {b, b};
    }
    const double r = std::pow(b, e);
    if (!std::isfinite(r)) {
        throw IntervalError("pow overflow");
    }
    const double lo = std::max(0.0, down(r - r * kPowSlack));
    const double hi = up(r + r * kPowSlack);
    return {lo, hi};
}

}  // namespace

Interval pow(const Interval& base, const Interval& exponent)
{
    if (base.lo() < 0.0) {
        throw IntervalError("pow: negative base " + base.str());
    }
    if (exponent.lo() < 0.0) {
        throw IntervalError("pow: negative exponent " + exponent.str());
    }
    // b^e is monotone in b for fixed e >= 0 and monotone in e for fixed b,
    // so extrema over the box are attained at its corners.
    double lo = kInf;
    double hi = -kInf;
    for (double b : {base.lo(), base.hi()}) {
        for (double e : {exponent.lo(), exponent.hi()}) {
            const auto [l, h] = pow_point(b, e);
            lo = std::min(lo, l);
            hi = std::max(hi, h);
        }
    }
    // 0^e = 0 for e > 0 but 0^0 = 1: the corner scan already covers both.
    return {lo, hi};
}

Interval ball(double center, double radius)
{
    if (!(radius >= 0.0)) {
        throw IntervalError("ball radius must be nonnegative");
    }
    return {add_lo(center, -radius), add_hi(center, radius)};
}

std::ostream& operator<<(std::ostream& os, const Interval& a)
{
    return os << a.str();
}

IntervalMatrix3 point_matrix(const std::array<std::array<double, 3>, 3>& m)
{
    IntervalMatrix3 r{};
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            r[i][k] = Interval(m[i][k]);
        }
    }
    return r;
}

IntervalMatrix3 identity_matrix3()
{
    IntervalMatrix3 r{};
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            r[i][k] = Interval(i == k ? 1.0 : 0.0);
        }
    }
    return r;
}

IntervalMatrix3 mat_mul(const IntervalMatrix3& a, const IntervalMatrix3& b)
{
    IntervalMatrix3 r{};
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            Interval s = a[i][0] * b[0][k];
            s += a[i][1] * b[1][k];
            s += a[i][2] * b[2][k];
            r[i][k] = s;
        }
    }
    return r;
}

IntervalMatrix3 mat_sub(const IntervalMatrix3& a, const IntervalMatrix3& b)
{
    IntervalMatrix3 r{};
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            r[i][k] = a[i][k] - b[i][k];
        }
    }
    return r;
}

Interval linf_op_norm(const IntervalMatrix3& m)
{
    Interval best;
    for (int i = 0; i < 3; ++i) {
        const Interval row = abs_val(m[i][0]) + abs_val(m[i][1]) + abs_val(m[i][2]);
        best = i == 0 ? row : max(best, row);
    }
    return best;
}

Interval vec_linf(const IntervalVector3& v)
{
    return max(max(abs_val(v[0]), abs_val(v[1])), abs_val(v[2]));
}

}  // namespace superpack
