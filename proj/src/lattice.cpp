#include "superpack/lattice.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace superpack {

Basis::Basis(const Eigen::Matrix3d& m) : m_(m)
{
    if (!m.allFinite()) {
        throw std::invalid_argument("basis has non-finite entries");
    }
    if (std::fabs(m.determinant()) < kMinAbsDet) {
        throw std::invalid_argument("determinant too small");
    }
}

Basis Basis::from_row_major(std::span<const double> entries)
{
    if (entries.size() != 9) {
        throw std::invalid_argument("basis needs 9 entries, got " + std::to_string(entries.size()));
    }
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            m(i, k) = entries[3 * i + k];
        }
    }
    return Basis(m);
}

Vec3 Basis::apply(const IntVec3& u) const
{
    Vec3 r{};
    for (int i = 0; i < 3; ++i) {
        r[i] = m_(i, 0) * u[0] + m_(i, 1) * u[1] + m_(i, 2) * u[2];
    }
    return r;
}

std::array<double, 9> Basis::row_major() const
{
    std::array<double, 9> out{};
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            out[3 * i + k] = m_(i, k);
        }
    }
    return out;
}

NeighborCase neighbor_case(CaseId id)
{
    switch (id) {
    case CaseId::I:
        return {id, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, -1, 0}, {0, 1, -1}, {1, 0, -1}}};
    case CaseId::II:
        return {id, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1}}};
    case CaseId::III:
        return {id, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 1}}};
    }
    throw std::invalid_argument("unknown neighbor case");
}

std::string to_string(CaseId id)
{
    switch (id) {
    case CaseId::I:
        return "I";
    case CaseId::II:
        return "II";
    case CaseId::III:
        return "III";
    }
    return "?";
}

CaseId case_from_int(int c)
{
    if (c < 1 || c > 3) {
        throw std::invalid_argument("case must be 1, 2 or 3");
    }
    return static_cast<CaseId>(c);
}

double density(const Basis& b, Exponent p)
{
    return superball_volume(p, 0.5) / std::fabs(b.det());
}

IntVec3 enumeration_bound(const Basis& b, Exponent p, double mu)
{
    if (!(mu >= 0.0)) {
        throw std::invalid_argument("enumeration_bound: mu must be nonnegative");
    }
    const double q = conjugate_exponent(p);
    const Eigen::Matrix3d inv = b.matrix().inverse();
    IntVec3 bound{};
    for (int i = 0; i < 3; ++i) {
        const std::array<double, 3> row{inv(i, 0), inv(i, 1), inv(i, 2)};
        const double r = dual_norm(row, q) * mu;
        if (r > static_cast<double>(std::numeric_limits<int>::max() / 4)) {
            throw std::runtime_error("enumeration_bound: box too large");
        }
        bound[i] = static_cast<int>(std::floor(r));
    }
    return bound;
}

namespace {

template <class Visit>
std::uint64_t for_each_in_box(const IntVec3& box, Visit&& visit)
{
    const double count = (2.0 * box[0] + 1) * (2.0 * box[1] + 1) * (2.0 * box[2] + 1);
    if (count > 2e9) {
        throw std::runtime_error("enumeration box too large");
    }
    std::uint64_t visited = 0;
    for (int a = -box[0]; a <= box[0]; ++a) {
        for (int c = -box[1]; c <= box[1]; ++c) {
            for (int d = -box[2]; d <= box[2]; ++d) {
                if (a == 0 && c == 0 && d == 0) {
                    continue;
                }
                visit(IntVec3{a, c, d});
                ++visited;
            }
        }
    }
    return visited;
}

}  // namespace

PackingCheckReport verify_packing(const Basis& b, Exponent p, double tol)
{
    if (!(tol >= 0.0 && tol <= 1e-3)) {
        throw std::invalid_argument("verify_packing: tol must lie in [0, 1e-3]");
    }
    PackingCheckReport rep;
    rep.enumeration_box = enumeration_bound(b, p, 1.0 + tol);
    rep.min_norm = std::numeric_limits<double>::infinity();
    rep.vectors_checked = for_each_in_box(rep.enumeration_box, [&](const IntVec3& u) {
        const double n = lp_norm(b.apply(u), p);
        if (n < rep.min_norm) {
            rep.min_norm = n;
            rep.argmin = u;
        }
        if (n < 1.0 - tol) {
            rep.violators.push_back(u);
        }
    });
    // An empty box means every nonzero lattice vector is longer than 1 + tol.
    if (rep.vectors_checked == 0) {
        rep.min_norm = 1.0 + tol;
    }
    rep.is_packing = rep.violators.empty();
    return rep;
}

bool hanner_verify(const Basis& b, Exponent p, double tol)
{
    if (!(p.value() > 1.0 && p.value() < 2.0)) {
        throw std::domain_error("hanner_verify requires 1 < p < 2");
    }
    double worst = 0.0;
    for (const auto& u : neighbor_case(CaseId::III).representatives) {
        worst = std::max(worst, std::fabs(lp_norm(b.apply(u), p) - 1.0));
    }
    return worst <= tol;
}

int count_neighbors(const Basis& b, Exponent p, double tol)
{
    int n = 0;
    for_each_in_box(enumeration_bound(b, p, 1.0 + tol), [&](const IntVec3& u) {
        if (lp_norm(b.apply(u), p) <= 1.0 + tol) {
            ++n;
        }
    });
    return n;
}

namespace {

BasisRecord record_from_json(const nlohmann::json& j)
{
    if (!j.is_object() || !j.contains("matrix")) {
        throw std::invalid_argument("basis JSON needs a \"matrix\" field");
    }
    const auto& m = j.at("matrix");
    if (!m.is_array() || m.size() != 9) {
        throw std::invalid_argument("\"matrix\" must be an array of 9 numbers");
    }
    std::array<double, 9> entries{};
    for (std::size_t i = 0; i < 9; ++i) {
        if (!m[i].is_number()) {
            throw std::invalid_argument("matrix entry " + std::to_string(i) + " is not a number: " + m[i].dump());
        }
        entries[i] = m[i].get<double>();
    }
    BasisRecord rec{Basis::from_row_major(entries), std::nullopt};
    if (j.contains("p") && j.at("p").is_number()) {
        rec.p = j.at("p").get<double>();
    }
    return rec;
}

}  // namespace

BasisRecord parse_basis(std::string_view text)
{
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        throw std::invalid_argument("empty basis input");
    }
    if (text[first] == '{' || text[first] == '[') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument(std::string("malformed basis JSON: ") + e.what());
        }
        if (j.is_array()) {
            if (j.empty()) {
                throw std::invalid_argument("basis JSON array is empty");
            }
            return record_from_json(j.front());
        }
        return record_from_json(j);
    }
    std::istringstream in{std::string(text)};
    std::vector<double> entries;
    std::string tok;
    while (in >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != tok.size()) {
            throw std::invalid_argument("cannot parse basis token '" + tok + "'");
        }
        entries.push_back(v);
    }
    return {Basis::from_row_major(entries), std::nullopt};
}

BasisRecord read_basis_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::invalid_argument("cannot open basis file " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_basis(ss.str());
}

}  // namespace superpack
