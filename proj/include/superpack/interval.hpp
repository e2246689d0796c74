#ifndef SUPERPACK_INTERVAL_HPP
#define SUPERPACK_INTERVAL_HPP

#include <array>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace superpack {

// Outward-rounded interval arithmetic in double precision.
//
// Rounding: every operation is evaluated in the default round-to-nearest
// mode. For +, -, *, / the exact rounding error is recovered with an
// error-free transformation (TwoSum, or an FMA residual), and an endpoint
// is moved one ulp outward only when the rounded value lies on the wrong
// side of the exact one. Each endpoint is therefore the tightest double
// enclosure (at most 1 ulp wide) unless the result is tiny (|r| < 2^-968),
// where both endpoints are pushed outward unconditionally. No rounding
// mode is ever changed, so intervals are safe to use from any thread.
//
// pow(b, e) is evaluated as std::pow at the corners of the box and then
// widened by a relative 2^-50 (4 ulp) plus one ulp, which dominates the
// < 1 ulp error bound of glibc's pow.
class Interval {
public:
    constexpr Interval() = default;
    constexpr Interval(double v) : lo_(v), hi_(v) {}  // NOLINT: point interval
    Interval(double lo, double hi);

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double mid() const noexcept { return 0.5 * (lo_ + hi_); }
    double width() const noexcept { return hi_ - lo_; }

    bool contains(double v) const noexcept { return lo_ <= v && v <= hi_; }
    bool contains_zero() const noexcept { return lo_ <= 0.0 && 0.0 <= hi_; }
    bool subset_of(const Interval& o) const noexcept { return o.lo_ <= lo_ && hi_ <= o.hi_; }

    /// "[lo,hi]" with 17 significant digits.
    std::string str() const;

private:
    double lo_ = 0.0;
    double hi_ = 0.0;
};

class IntervalError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);

inline Interval& operator+=(Interval& a, const Interval& b) { return a = a + b; }
inline Interval& operator-=(Interval& a, const Interval& b) { return a = a - b; }
inline Interval& operator*=(Interval& a, const Interval& b) { return a = a * b; }

Interval abs_val(const Interval& a);
Interval max(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);

/// Encloses { b^e : b in base, e in exponent } for base >= 0, exponent >= 0.
/// 0^0 is taken as 1 and 0^e as 0 for e > 0.
Interval pow(const Interval& base, const Interval& exponent);

/// [center - radius, center + radius], rounded outward.
Interval ball(double center, double radius);

std::ostream& operator<<(std::ostream& os, const Interval& a);

using IntervalVector3 = std::array<Interval, 3>;
using IntervalMatrix3 = std::array<std::array<Interval, 3>, 3>;

IntervalMatrix3 point_matrix(const std::array<std::array<double, 3>, 3>& m);
IntervalMatrix3 identity_matrix3();
IntervalMatrix3 mat_mul(const IntervalMatrix3& a, const IntervalMatrix3& b);
IntervalMatrix3 mat_sub(const IntervalMatrix3& a, const IntervalMatrix3& b);

/// Max over rows of the l^1 row norm: the l^inf operator norm.
Interval linf_op_norm(const IntervalMatrix3& m);
Interval vec_linf(const IntervalVector3& v);

}  // namespace superpack

#endif
