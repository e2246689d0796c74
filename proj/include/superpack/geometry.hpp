#ifndef SUPERPACK_GEOMETRY_HPP
#define SUPERPACK_GEOMETRY_HPP

#include <array>
#include <limits>
#include <span>
#include <stdexcept>

namespace superpack {

using Vec3 = std::array<double, 3>;

/// Exponent of an l^p norm. Always finite and >= 1.
class Exponent {
public:
    explicit Exponent(double p);

    double value() const noexcept { return p_; }
    operator double() const noexcept { return p_; }

private:
    double p_;
};

/// log2(3), where the first regime of superball packings ends.
inline constexpr double kLog2Of3 = 1.5849625007211562;

/// |t|^p with 0^p = 0 for every p >= 1.
double abs_pow(double t, double p);

double lp_norm(std::span<const double> v, Exponent p);
inline double lp_norm(const Vec3& v, Exponent p) { return lp_norm(std::span<const double>(v), p); }

/// sum |v_i|^p, i.e. lp_norm^p without the outer root.
double lp_norm_pow(const Vec3& v, Exponent p);

/// Max-abs norm, used for the conjugate exponent of p = 1.
double linf_norm(std::span<const double> v);

/// q with 1/p + 1/q = 1; +infinity when p == 1.
double conjugate_exponent(Exponent p);

/// l^q norm for q in [1, +inf]; q = inf is the max-abs norm.
double dual_norm(std::span<const double> v, double q);

/// Gamma function on the positive reals. Wraps std::tgamma, whose libm
/// implementation stays within a few ulp on [1, 4] (relative error far
/// below 1e-12).
double gamma_fn(double x);

/// Volume of scale * B^p_3 = (2 scale)^3 Gamma(1+1/p)^3 / Gamma(1+3/p).
double superball_volume(Exponent p, double scale = 1.0);

}  // namespace superpack

#endif
