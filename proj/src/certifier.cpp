#include "superpack/certifier.hpp"

#include "superpack/family.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

namespace superpack {

std::string to_string(RowStatus s)
{
    switch (s) {
    case RowStatus::pass:
        return "pass";
    case RowStatus::inequality_failed:
        return "inequality-failed";
    case RowStatus::region:
        return "region";
    case RowStatus::singular_t:
        return "singular-T";
    }
    return "unknown";
}

bool region_check(const Vec3& center, double eps)
{
    if (!(eps > 0.0)) {
        throw std::invalid_argument("region_check: eps must be positive");
    }
    const Interval x = ball(center[0], eps);
    const Interval y = ball(center[1], eps);
    const Interval z = ball(center[2], eps);
    return y.lo() >= 0.0 && (x - y).lo() >= 0.0 && (z - x).lo() >= 0.0 && (-x + y + z).lo() >= 0.0;
}

Interval row_p_interval(double p0, double peps)
{
    if (!(peps > 0.0)) {
        throw std::invalid_argument("row p-width must be positive");
    }
    const double hi = (Interval(p0) + Interval(peps)).hi();
    const double inf = std::numeric_limits<double>::infinity();
    return {p0, std::nextafter(std::nextafter(hi, inf), inf)};
}

std::vector<Interval> split_interval(const Interval& a, int k)
{
    if (k < 1) {
        throw std::invalid_argument("split count must be >= 1");
    }
    std::vector<Interval> out;
    out.reserve(static_cast<std::size_t>(k));
    double lo = a.lo();
    for (int i = 1; i <= k; ++i) {
        double hi = i == k ? a.hi() : a.lo() + a.width() * i / k;
        hi = std::clamp(hi, lo, a.hi());
        out.emplace_back(lo, hi);
        lo = hi;
    }
    return out;
}

CertificateRow verify_row(const RowParams& params, const VerifyOptions& opts)
{
    CertificateRow row;
    row.splits = opts.splits;
    const Interval p = row_p_interval(params.p0, params.peps);
    row.p_lo = p.lo();
    row.p_hi = p.hi();
    row.center = {params.x0, params.y0, params.z0};
    row.eps = params.eps;
    row.region_ok = region_check(row.center, params.eps);
    if (!row.region_ok) {
        row.status = RowStatus::region;
        return row;
    }

    const auto jac = family_jacobian(Exponent(params.p0), params.x0, params.y0, params.z0);
    Eigen::Matrix3d j;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            j(r, c) = jac[r][c];
        }
    }
    const Eigen::FullPivLU<Eigen::Matrix3d> lu(j);
    Eigen::Matrix3d t = lu.inverse();
    if (opts.t_override) {
        t = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(opts.t_override->data());
    }
    const double cond = j.cwiseAbs().rowwise().sum().maxCoeff() * t.cwiseAbs().rowwise().sum().maxCoeff();
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            row.T[3 * r + c] = t(r, c);
        }
    }
    if (!lu.isInvertible() || !t.allFinite() || !(cond <= kMaxConditionT)) {
        row.status = RowStatus::singular_t;
        return row;
    }

    std::array<std::array<double, 3>, 3> tpoint{};
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            tpoint[r][c] = t(r, c);
        }
    }
    const IntervalMatrix3 tm = point_matrix(tpoint);
    const Interval t_norm = linf_op_norm(tm);
    const Interval eps(params.eps);

    const auto ps = split_interval(p, opts.splits);
    const auto xs = split_interval(ball(params.x0, params.eps), opts.splits);
    const auto ys = split_interval(ball(params.y0, params.eps), opts.splits);
    const auto zs = split_interval(ball(params.z0, params.eps), opts.splits);

    std::optional<Interval> lhs;
    std::optional<Interval> rhs;
    for (const auto& pp : ps) {
        const auto f0 = family_system_t<Interval>(pp, Interval(params.x0), Interval(params.y0), Interval(params.z0));
        const Interval r = Interval(1.0) - t_norm * vec_linf(f0) / eps;
        rhs = rhs ? hull(*rhs, r) : r;
        for (const auto& x : xs) {
            for (const auto& y : ys) {
                for (const auto& z : zs) {
                    const auto df = family_jacobian_t<Interval>(pp, x, y, z);
                    const Interval l = linf_op_norm(mat_sub(mat_mul(df, tm), identity_matrix3()));
                    lhs = lhs ? hull(*lhs, l) : l;
                }
            }
        }
    }
    row.lhs = *lhs;
    row.rhs = *rhs;
    row.pass = row.lhs.hi() < row.rhs.lo();
    row.status = row.pass ? RowStatus::pass : RowStatus::inequality_failed;
    return row;
}

bool CertificateChain::covers(double a, double b) const noexcept
{
    return covered && covered->lo() <= a && covered->hi() >= b;
}

CertificateChain certify_schedule(const std::vector<RowParams>& rows, int jobs, const VerifyOptions& opts)
{
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].p0 < rows[i - 1].p0) {
            throw std::invalid_argument("certify_schedule: rows must be sorted by p0");
        }
    }
    CertificateChain chain;
    chain.rows.resize(rows.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < rows.size(); i = next++) {
            chain.rows[i] = verify_row(rows[i], opts);
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < jobs; ++t) {
            pool.emplace_back(worker);
        }
    }

    chain.all_pass = !rows.empty();
    for (std::size_t i = 0; i < chain.rows.size(); ++i) {
        if (!chain.rows[i].pass) {
            chain.all_pass = false;
            if (!chain.failed_row) {
                chain.failed_row = i;
            }
        }
    }
    // Gap-free prefix of passing rows.
    double hi = 0.0;
    for (std::size_t i = 0; i < chain.rows.size(); ++i) {
        const auto& r = chain.rows[i];
        if (!r.pass) {
            break;
        }
        if (i == 0) {
            hi = r.p_hi;
        } else if (r.p_lo > hi) {
            chain.gap_at = hi;
            break;
        } else {
            hi = std::max(hi, r.p_hi);
        }
        chain.covered = Interval(chain.rows.front().p_lo, hi);
    }
    // A gap can also sit behind a failing row; report it for diagnostics.
    if (!chain.gap_at) {
        for (std::size_t i = 1; i < chain.rows.size(); ++i) {
            if (chain.rows[i].p_lo > chain.rows[i - 1].p_hi) {
                chain.gap_at = chain.rows[i - 1].p_hi;
                break;
            }
        }
    }
    return chain;
}

void require_valid(const CertificateChain& chain)
{
    if (chain.rows.empty()) {
        throw CertificationError("empty certificate schedule");
    }
    if (chain.failed_row) {
        const auto& r = chain.rows[*chain.failed_row];
        std::ostringstream msg;
        msg << "row " << *chain.failed_row << " (p0 = " << r.p_lo << ") failed: " << to_string(r.status);
        throw CertificationError(msg.str());
    }
    if (chain.gap_at) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "gap in certificate chain after p = " << *chain.gap_at;
        throw CertificationError(msg.str());
    }
}

std::vector<ScheduleEntry> reference_schedule_layout()
{
    struct Printed {
        int p0_thousandths;
        Vec3 center;
    };
    static const Printed printed[] = {
        {1000, {0.333333333333, 0.166666666667, 0.5}},
        {1010, {0.336543320255, 0.169227330456, 0.504294897412}},
        {1020, {0.339721855623, 0.171809715243, 0.508503843298}},
        {1500, {0.475292821919, 0.375983627555, 0.580059051165}},
        {1510, {0.47822053429, 0.384961182567, 0.576346694842}},
        {1520, {0.481163698665, 0.394556223383, 0.572012690078}},
        {1521, {0.48145875646, 0.395553814361, 0.571540873724}},
        {1522, {0.481753934423, 0.396558835694, 0.571061553436}},
        {1523, {0.482049228267, 0.39757142775, 0.570574584849}},
        {1577, {0.497880292399, 0.472696125604, 0.523437325276}},
        {1578, {0.498157887988, 0.475000219764, 0.521630841401}},
        {1579, {0.498433446144, 0.477421354522, 0.519705097786}},
    };
    std::vector<ScheduleEntry> out;
    auto add = [&](int thousandths, double eps, double peps) {
        ScheduleEntry e;
        e.p0 = thousandths / 1000.0;
        e.eps = eps;
        e.peps = peps;
        for (const auto& p : printed) {
            if (p.p0_thousandths == thousandths) {
                e.center = p.center;
            }
        }
        out.push_back(e);
    };
    for (int k = 1000; k <= 1510; k += 10) {
        add(k, 0.03, 0.01);
    }
    for (int k = 1520; k <= 1579; ++k) {
        add(k, 0.006, 0.001);
    }
    return out;
}

std::vector<RowParams> complete_schedule(const std::vector<ScheduleEntry>& entries)
{
    std::vector<double> missing;
    for (const auto& e : entries) {
        if (!e.center) {
            missing.push_back(e.p0);
        }
    }
    const auto solved = continue_family(missing);
    std::vector<RowParams> rows;
    rows.reserve(entries.size());
    std::size_t k = 0;
    for (const auto& e : entries) {
        Vec3 c{};
        if (e.center) {
            c = *e.center;
        } else {
            const auto& pt = solved[k++];
            if (!pt) {
                std::ostringstream msg;
                msg << "family solver could not produce a center at p0 = " << e.p0;
                throw CertificationError(msg.str());
            }
            c = {pt->x, pt->y, pt->z};
        }
        rows.push_back({e.p0, c[0], c[1], c[2], e.eps, e.peps});
    }
    return rows;
}

std::vector<RowParams> reference_schedule()
{
    return complete_schedule(reference_schedule_layout());
}

AutoSchedule auto_schedule(double p_start, double p_end, double initial_step, bool allow_past_limit,
                           const VerifyOptions& opts)
{
    if (!(initial_step > 0.0) || !(p_end > p_start) || p_start < 1.0) {
        throw std::invalid_argument("auto_schedule: need 1 <= p_start < p_end and a positive step");
    }
    if (!allow_past_limit && p_end > kCertifiedLimit + 1e-12) {
        throw std::invalid_argument("auto_schedule: p_end beyond 1.58 requires the override flag");
    }
    constexpr double kMinStep = 1e-10;
    constexpr std::size_t kMaxRows = 5000;

    AutoSchedule out;
    out.reached = p_start;
    double p = p_start;
    double h = initial_step;
    while (p < p_end && out.rows.size() < kMaxRows) {
        const auto pt = family_point_at(p);
        if (!pt || !in_family_region(pt->x, pt->y, pt->z) || pt->p > kFamilyContinuationEnd) {
            break;
        }
        bool placed = false;
        while (!placed && h >= kMinStep) {
            const double width = std::min(h, p_end - p);
            for (double factor : {3.0, 1.5, 0.75, 6.0}) {
                const RowParams rp{p, pt->x, pt->y, pt->z, factor * width, width};
                const CertificateRow row = verify_row(rp, opts);
                if (row.pass) {
                    out.rows.push_back(rp);
                    p = row.p_hi;
                    placed = true;
                    break;
                }
            }
            if (placed) {
                h = std::min(initial_step, 2.0 * h);
            } else {
                h *= 0.5;
            }
        }
        if (!placed) {
            break;
        }
        out.reached = p;
    }
    out.complete = out.reached >= p_end;
    return out;
}

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        return "";
    }
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& tok, std::size_t line_no)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != tok.size()) {
        throw std::invalid_argument("schedule line " + std::to_string(line_no) + ": cannot parse '" + tok + "'");
    }
    return v;
}

}  // namespace

std::vector<ScheduleEntry> parse_schedule_csv(std::istream& in)
{
    std::vector<ScheduleEntry> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line);
        if (line.empty() || line[0] == '#') {
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ',')) {
            fields.push_back(trim(f));
        }
        if (line.back() == ',') {
            fields.emplace_back();
        }
        if (fields.size() != 6) {
            throw std::invalid_argument("schedule line " + std::to_string(line_no) + ": expected 6 fields");
        }
        if (fields[0] == "p0") {
            continue;
        }
        ScheduleEntry e;
        e.p0 = parse_number(fields[0], line_no);
        const bool blank = fields[1].empty() && fields[2].empty() && fields[3].empty();
        if (!blank) {
            e.center = Vec3{parse_number(fields[1], line_no), parse_number(fields[2], line_no),
                            parse_number(fields[3], line_no)};
        }
        e.eps = parse_number(fields[4], line_no);
        e.peps = parse_number(fields[5], line_no);
        out.push_back(e);
    }
    return out;
}

void write_certificate_jsonl(std::ostream& os, const CertificateChain& chain)
{
    for (const auto& r : chain.rows) {
        nlohmann::ordered_json j;
        j["p_lo"] = r.p_lo;
        j["p_hi"] = r.p_hi;
        j["center"] = {r.center[0], r.center[1], r.center[2]};
        j["eps"] = r.eps;
        j["T"] = r.T;
        j["lhs"] = {r.lhs.lo(), r.lhs.hi()};
        j["rhs"] = {r.rhs.lo(), r.rhs.hi()};
        j["region_ok"] = r.region_ok;
        j["pass"] = r.pass;
        j["status"] = to_string(r.status);
        j["splits"] = r.splits;
        os << j.dump() << '\n';
    }
    nlohmann::ordered_json s;
    if (chain.covered) {
        s["covered"] = {chain.covered->lo(), chain.covered->hi()};
    } else {
        s["covered"] = nullptr;
    }
    s["rows"] = chain.rows.size();
    s["all_pass"] = chain.ok();
    if (chain.gap_at) {
        s["gap_at"] = *chain.gap_at;
    }
    if (chain.failed_row) {
        s["failed_row"] = *chain.failed_row;
    }
    os << s.dump() << '\n';
}

}  // namespace superpack
