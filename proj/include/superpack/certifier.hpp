#ifndef SUPERPACK_CERTIFIER_HPP
#define SUPERPACK_CERTIFIER_HPP

#include "superpack/geometry.hpp"
#include "superpack/interval.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Existence certificates for the family f_p(x, y, z) = 0.
//
// For a subinterval P = [p0, p0 + peps] and the l^inf ball X of radius
// eps around a numerical zero c of f_{p0}, a zero of f_p in X exists for
// every p in P provided
//
//     || Df_P(X) T - I ||  <  1 - ||T|| * |f_P(c)| / eps
//
// holds in interval arithmetic, where T is any fixed matrix (we take the
// floating-point inverse of Df_{p0}(c)) and all norms are l^inf.

namespace superpack {

struct RowParams {
    double p0 = 1.0;
    double x0 = 0.0;
    double y0 = 0.0;
    double z0 = 0.0;
    double eps = 0.03;
    double peps = 0.01;
};

enum class RowStatus { pass, inequality_failed, region, singular_t };
std::string to_string(RowStatus s);

struct CertificateRow {
    double p_lo = 0.0;
    double p_hi = 0.0;
    Vec3 center{};
    double eps = 0.0;
    std::array<double, 9> T{};
    Interval lhs;
    Interval rhs;
    bool region_ok = false;
    bool pass = false;
    RowStatus status = RowStatus::region;
    int splits = 1;
    /// Use this matrix (row-major) as T instead of the inverse point Jacobian.
    std::optional<std::array<double, 9>> t_override;
};

/// True iff every point of the closed l^inf ball keeps all power
/// arguments of f nonnegative: y, x - y, z - x, -x + y + z >= 0.
/// Evaluated with outward rounding.
bool region_check(const Vec3& center, double eps);

/// The p-interval certified by a row: [p0, p0 + peps] with the upper end
/// rounded up and widened by two ulp, so rows whose p0 values come from
/// decimal literals chain without spurious floating-point gaps.
Interval row_p_interval(double p0, double peps);

struct VerifyOptions {
    /// Each of X (three coordinates) and P is cut into `splits` pieces and
    /// the inequality sides are taken as hulls over the pieces. Still a
    /// rigorous bound; 1 is the plain single-box evaluation.
    int splits = 1;
    /// Use this matrix (row-major) as T instead of the inverse point Jacobian.
    std::optional<std::array<double, 9>> t_override;
};

CertificateRow verify_row(const RowParams& params, const VerifyOptions& opts = {});

/// [lo, hi] cut into k adjacent closed pieces sharing endpoints.
std::vector<Interval> split_interval(const Interval& a, int k);

/// T^(-1) condition estimate above which a row reports singular_t.
inline constexpr double kMaxConditionT = 1e12;

struct CertificateChain {
    std::vector<CertificateRow> rows;
    /// Gap-free prefix [first.p_lo, b] covered by passing rows.
    std::optional<Interval> covered;
    bool all_pass = false;
    /// First uncovered p when consecutive rows leave a hole.
    std::optional<double> gap_at;
    /// First row that did not pass.
    std::optional<std::size_t> failed_row;

    bool ok() const noexcept { return all_pass && !gap_at; }
    bool covers(double a, double b) const noexcept;
};

class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Verifies every row (concurrently when jobs > 1) and checks the chain
/// next.p_lo <= current.p_hi. Rows must be sorted by p0.
CertificateChain certify_schedule(const std::vector<RowParams>& rows, int jobs = 1,
                                  const VerifyOptions& opts = {});

/// Throws CertificationError describing the first gap or failing row.
void require_valid(const CertificateChain& chain);

/// Step/eps layout of the reference certificate run: step 0.01 with
/// eps 0.03 for p0 = 1.00 .. 1.51, step 0.001 with eps 0.006 for
/// p0 = 1.520 .. 1.579. Centers without a stored value are nullopt.
struct ScheduleEntry {
    double p0 = 1.0;
    std::optional<Vec3> center;
    double eps = 0.03;
    double peps = 0.01;
};
std::vector<ScheduleEntry> reference_schedule_layout();

/// Fills missing centers from family continuation at p0.
std::vector<RowParams> complete_schedule(const std::vector<ScheduleEntry>& entries);

std::vector<RowParams> reference_schedule();

inline constexpr int kAutoScheduleSplits = 2;

struct AutoSchedule {
    std::vector<RowParams> rows;
    /// Upper end of the gap-free certified prefix.
    double reached = 0.0;
    bool complete = false;
};

/// Greedy schedule: at each p0 take the family center, try eps = 3h and
/// smaller/larger radii, halve the step h on failure and grow it back
/// (up to initial_step) after success.
AutoSchedule auto_schedule(double p_start, double p_end, double initial_step, bool allow_past_limit = false,
                           const VerifyOptions& opts = {kAutoScheduleSplits, {}});

inline constexpr double kCertifiedLimit = 1.58;

/// CSV "p0,x0,y0,z0,eps,peps"; a header line is optional and empty
/// center fields mean "regenerate from the family solver".
std::vector<ScheduleEntry> parse_schedule_csv(std::istream& in);

/// One JSON object per row followed by the chain summary.
void write_certificate_jsonl(std::ostream& os, const CertificateChain& chain);

}  // namespace superpack

#endif
