#ifndef SUPERPACK_LATTICE_HPP
#define SUPERPACK_LATTICE_HPP

#include "superpack/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace superpack {

using IntVec3 = std::array<int, 3>;

/// Lattice basis. Columns of the matrix are the generators b1, b2, b3.
class Basis {
public:
    static constexpr double kMinAbsDet = 1e-12;

    explicit Basis(const Eigen::Matrix3d& m);
    /// Row-major entries.
    static Basis from_row_major(std::span<const double> entries);

    const Eigen::Matrix3d& matrix() const noexcept { return m_; }
    double det() const { return m_.determinant(); }
    Vec3 apply(const IntVec3& u) const;
    std::array<double, 9> row_major() const;

private:
    Eigen::Matrix3d m_;
};

enum class CaseId { I = 1, II = 2, III = 3 };

/// Minkowski contact configuration: one representative per +/- pair.
struct NeighborCase {
    CaseId id;
    std::vector<IntVec3> representatives;
};

NeighborCase neighbor_case(CaseId id);
std::string to_string(CaseId id);
CaseId case_from_int(int c);

struct PackingCheckReport {
    bool is_packing = false;
    double min_norm = 0.0;
    IntVec3 argmin{0, 0, 0};
    IntVec3 enumeration_box{0, 0, 0};
    std::uint64_t vectors_checked = 0;
    std::vector<IntVec3> violators;
};

inline constexpr double kDefaultTol = 1e-9;
/// Tolerance used for matrices printed to 12 digits.
inline constexpr double kTableTol = 1e-6;

/// vol(1/2 B^p_3) / |det B|.
double density(const Basis& b, Exponent p);

/// Per-coordinate bound |u_i| <= floor(||row_i(B^-1)||_q * mu) for all
/// integer u with ||Bu||_p <= mu.
IntVec3 enumeration_bound(const Basis& b, Exponent p, double mu);

PackingCheckReport verify_packing(const Basis& b, Exponent p, double tol = kDefaultTol);

/// Checks the Case III equalities only. Sufficient for packing when 1 < p < 2.
bool hanner_verify(const Basis& b, Exponent p, double tol);

/// Number of nonzero u with ||Bu||_p <= 1 + tol.
int count_neighbors(const Basis& b, Exponent p, double tol = kDefaultTol);

/// A basis read from disk, with the exponent if the source carried one.
struct BasisRecord {
    Basis basis;
    std::optional<double> p;
};

/// Accepts {"matrix": [9], "p": x}, a JSON array of such objects (first
/// element is used), or 9 whitespace separated numbers, all row-major.
BasisRecord parse_basis(std::string_view text);
BasisRecord read_basis_file(const std::string& path);

}  // namespace superpack

#endif
