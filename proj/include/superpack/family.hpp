#ifndef SUPERPACK_FAMILY_HPP
#define SUPERPACK_FAMILY_HPP

#include "superpack/geometry.hpp"
#include "superpack/interval.hpp"
#include "superpack/lattice.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// The one-parameter family of Case III lattices
//
//        | -x   y   z |
//   L =  |  z  -x   y |      z >= x >= y >= 0,
//        |  y   z  -x |
//
// pinned down by ||L(1,0,0)||_p = ||L(1,1,0)||_p = ||L(1,1,1)||_p = 1.
// Rows are cyclic shifts, so those three equations imply all seven
// Case III equalities.

namespace superpack {

class FamilyDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// base^e for base >= 0, e >= 0, with t^0 = 1 (also at t = 0).
inline double family_power(double base, double e)
{
    if (base < 0.0) {
        throw FamilyDomainError("negative power argument " + std::to_string(base));
    }
    return std::pow(base, e);
}

inline Interval family_power(const Interval& base, const Interval& e)
{
    return pow(base, e);
}

template <class S>
using FamilyVector = std::array<S, 3>;
template <class S>
using FamilyMatrix = std::array<std::array<S, 3>, 3>;

/// f_p(x, y, z). Shared verbatim by the floating-point solver and the
/// interval certifier.
template <class S>
FamilyVector<S> family_system_t(const S& p, const S& x, const S& y, const S& z)
{
    const S one(1.0);
    const S three(3.0);
    return {
        family_power(x, p) + family_power(y, p) + family_power(z, p) - one,
        family_power(x - y, p) + family_power(z - x, p) + family_power(y + z, p) - one,
        three * family_power(-x + y + z, p) - one,
    };
}

/// Df_p(x, y, z) = p * [...], evaluated entrywise as written.
template <class S>
FamilyMatrix<S> family_jacobian_t(const S& p, const S& x, const S& y, const S& z)
{
    const S pm = p - S(1.0);
    const S three(3.0);
    const S xp = family_power(x, pm);
    const S yp = family_power(y, pm);
    const S zp = family_power(z, pm);
    const S xy = family_power(x - y, pm);
    const S zx = family_power(z - x, pm);
    const S yz = family_power(y + z, pm);
    const S w = three * family_power(-x + y + z, pm);
    FamilyMatrix<S> m{{
        {xp, yp, zp},
        {xy - zx, -xy + yz, zx + yz},
        {-w, w, w},
    }};
    for (auto& row : m) {
        for (auto& e : row) {
            e = p * e;
        }
    }
    return m;
}

Vec3 family_system(Exponent p, double x, double y, double z);

/// At p = 1 every entry is a constant: t^0 = 1 for all t >= 0.
FamilyMatrix<double> family_jacobian(Exponent p, double x, double y, double z);

struct FamilyPoint {
    double p = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double residual = 0.0;
};

/// z >= x >= y >= 0 and -x + y + z >= 0, up to slack.
bool in_family_region(double x, double y, double z, double slack = 0.0);

Basis family_matrix(const FamilyPoint& pt);
Basis family_matrix(double x, double y, double z);

/// det L(x, y, z) = y^3 + z^3 - x^3 + 3xyz.
double family_det(double x, double y, double z);

enum class SolveStatus { converged, singular_jacobian, left_region, max_iterations };
std::string to_string(SolveStatus s);

struct FamilySolve {
    SolveStatus status = SolveStatus::max_iterations;
    FamilyPoint point;
    int iterations = 0;

    bool ok() const noexcept { return status == SolveStatus::converged; }
};

struct FamilySolveOptions {
    double tol = 1e-11;
    int max_iterations = 100;
    int max_halvings = 30;
};

/// Damped Newton on f_p from a start strictly inside the region.
FamilySolve solve_family(Exponent p, const Vec3& start, const FamilySolveOptions& opts = {});

/// Where continuation stops; the endpoint (1/2, 1/2, 1/2) is used from here on.
inline constexpr double kFamilyContinuationEnd = kLog2Of3 - 1e-9;

/// Continuation from p = 1 (x, y, z) = (1/3, 1/6, 1/2) through every
/// requested p (in any order). Step 0.01, halved on failure, doubled back
/// after success. Entries are nullopt where the family could not be reached.
std::vector<std::optional<FamilyPoint>> continue_family(const std::vector<double>& p_values,
                                                        double initial_step = 0.01);

std::optional<FamilyPoint> family_point_at(double p);

struct FamilyRow {
    double p = 0.0;
    bool ok = false;
    FamilyPoint point;
    double det = 0.0;
    double density = 0.0;
    int neighbors = 0;
    std::string status;
};

std::vector<FamilyRow> family_table(const std::vector<double>& p_values);

}  // namespace superpack

#endif
