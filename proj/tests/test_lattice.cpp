#include "superpack/lattice.hpp"

#include "tables.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

using namespace superpack;
using superpack::testdata::case_one_at;
using superpack::testdata::case_three_at;
using superpack::testdata::case_three_matrices;

namespace {

Basis scaled(const Basis& b, double s)
{
    return Basis(b.matrix() * s);
}

Eigen::Matrix3d random_unimodular(std::mt19937_64& rng)
{
    std::uniform_int_distribution<int> idx(0, 2);
    std::uniform_int_distribution<int> mult(-2, 2);
    Eigen::Matrix3d u = Eigen::Matrix3d::Identity();
    for (int k = 0; k < 6; ++k) {
        const int i = idx(rng);
        int j = idx(rng);
        if (i == j) {
            j = (i + 1) % 3;
        }
        Eigen::Matrix3d e = Eigen::Matrix3d::Identity();
        e(i, j) = mult(rng);
        u = u * e;
    }
    return u;
}

}  // namespace

TEST_CASE("basis rejects singular matrices")
{
    CHECK_THROWS_AS(Basis(Eigen::Matrix3d::Zero()), std::invalid_argument);
    Eigen::Matrix3d m;
    m << 1, 2, 3, 2, 4, 6, 0, 0, 1;
    CHECK_THROWS_AS(Basis{m}, std::invalid_argument);
}

TEST_CASE("neighbor case representatives")
{
    CHECK(neighbor_case(CaseId::I).representatives.size() == 6);
    CHECK(neighbor_case(CaseId::II).representatives.size() == 6);
    const auto c3 = neighbor_case(CaseId::III).representatives;
    REQUIRE(c3.size() == 7);
    CHECK(c3.back() == IntVec3{1, 1, 1});
    CHECK(neighbor_case(CaseId::I).representatives[3] == IntVec3{1, -1, 0});
    CHECK_THROWS(case_from_int(4));
}

TEST_CASE("density examples")
{
    const Basis id(Eigen::Matrix3d::Identity());
    CHECK(std::fabs(density(id, Exponent(2.0)) - std::numbers::pi / 6.0) <= 1e-14);
    CHECK(std::fabs(density(case_three_at(1.0).basis(), Exponent(1.0)) - 18.0 / 19.0) <= 1e-10);
    CHECK(std::fabs(density(case_one_at(2.0).basis(), Exponent(2.0)) - std::numbers::pi / std::sqrt(18.0)) <= 1e-10);
}

TEST_CASE("enumeration bound examples")
{
    const Basis id(Eigen::Matrix3d::Identity());
    CHECK(enumeration_bound(id, Exponent(2.0), 1.0) == IntVec3{1, 1, 1});
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(0, 0) = 2.0;
    CHECK(enumeration_bound(Basis(d), Exponent(2.0), 1.0) == IntVec3{0, 1, 1});
}

TEST_CASE("enumeration bound for L(1/3, 1/6, 1/2) matches an exact rational inverse")
{
    // B = M / 6 with an integer M, so B^-1 = 6 adj(M) / det(M).
    const long m[3][3] = {{-2, 1, 3}, {3, -2, 1}, {1, 3, -2}};
    long adj[3][3];
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            const int r0 = (k + 1) % 3, r1 = (k + 2) % 3;
            const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
            adj[i][k] = m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
        }
    }
    const long det = m[0][0] * adj[0][0] + m[0][1] * adj[1][0] + m[0][2] * adj[2][0];
    REQUIRE(det == 38);
    IntVec3 oracle{};
    for (int i = 0; i < 3; ++i) {
        long row_max = 0;
        for (int k = 0; k < 3; ++k) {
            row_max = std::max(row_max, std::labs(6 * adj[i][k]));
        }
        // q = inf at p = 1; floor(row_max / det) in exact integer arithmetic.
        oracle[i] = static_cast<int>(row_max / det);
    }
    std::array<double, 9> rows{-1.0 / 3, 1.0 / 6, 0.5, 0.5, -1.0 / 3, 1.0 / 6, 1.0 / 6, 0.5, -1.0 / 3};
    CHECK(enumeration_bound(Basis::from_row_major(rows), Exponent(1.0), 1.0) == oracle);
}

TEST_CASE("verify_packing examples")
{
    const Basis id(Eigen::Matrix3d::Identity());
    const auto ok = verify_packing(id, Exponent(2.0), 1e-9);
    CHECK(ok.is_packing);
    CHECK(ok.min_norm == doctest::Approx(1.0));
    CHECK(ok.violators.empty());

    const auto bad = verify_packing(scaled(id, 0.9), Exponent(2.0), 1e-9);
    CHECK_FALSE(bad.is_packing);
    CHECK(bad.min_norm == doctest::Approx(0.9));
    CHECK(std::find(bad.violators.begin(), bad.violators.end(), IntVec3{1, 0, 0}) != bad.violators.end());

    const auto l12 = verify_packing(case_three_at(1.2).basis(), Exponent(1.2), kTableTol);
    CHECK(l12.is_packing);
    CHECK(std::fabs(l12.min_norm - 1.0) <= 1e-6);
    const auto& reps = neighbor_case(CaseId::III).representatives;
    const IntVec3 neg{-l12.argmin[0], -l12.argmin[1], -l12.argmin[2]};
    CHECK((std::find(reps.begin(), reps.end(), l12.argmin) != reps.end() ||
           std::find(reps.begin(), reps.end(), neg) != reps.end()));

    CHECK_THROWS(verify_packing(id, Exponent(2.0), 0.01));
    CHECK_THROWS(verify_packing(id, Exponent(2.0), -1.0));
}

TEST_CASE("hanner_verify examples")
{
    CHECK(hanner_verify(case_three_at(1.3).basis(), Exponent(1.3), 1e-6));
    CHECK_FALSE(hanner_verify(Basis(Eigen::Matrix3d::Identity()), Exponent(1.5), 1e-6));
    CHECK_THROWS_AS(hanner_verify(case_one_at(2.0).basis(), Exponent(2.0), 1e-6), std::domain_error);
    CHECK_THROWS_AS(hanner_verify(case_three_at(1.0).basis(), Exponent(1.0), 1e-6), std::domain_error);
}

TEST_CASE("count_neighbors examples")
{
    CHECK(count_neighbors(Basis(Eigen::Matrix3d::Identity()), Exponent(2.0), 1e-9) == 6);
    CHECK(count_neighbors(case_one_at(2.0).basis(), Exponent(2.0), 1e-6) == 12);
    CHECK(count_neighbors(case_three_at(1.4).basis(), Exponent(1.4), 1e-6) == 14);
}

TEST_CASE("every table matrix is a packing lattice with at most 26 neighbors")
{
    for (const auto& t : case_three_matrices()) {
        const auto r = verify_packing(t.basis(), Exponent(t.p), kTableTol);
        CHECK(r.is_packing);
        const int n = count_neighbors(t.basis(), Exponent(t.p), kTableTol);
        CHECK(n <= 26);
        CHECK(n % 2 == 0);
        if (t.p > 1.0) {
            CHECK(hanner_verify(t.basis(), Exponent(t.p), kTableTol));
        }
    }
    for (const auto& t : testdata::case_one_matrices()) {
        CHECK(verify_packing(t.basis(), Exponent(t.p), kTableTol).is_packing);
        CHECK(count_neighbors(t.basis(), Exponent(t.p), kTableTol) <= 26);
    }
}

TEST_CASE("unimodular invariance of density and minimum norm")
{
    std::mt19937_64 rng(17);
    for (const auto& t : case_three_matrices()) {
        const Basis b = t.basis();
        const auto base = verify_packing(b, Exponent(t.p), kTableTol);
        for (int k = 0; k < 5; ++k) {
            const Basis bu(b.matrix() * random_unimodular(rng));
            CHECK(density(bu, Exponent(t.p)) == doctest::Approx(density(b, Exponent(t.p))).epsilon(1e-9));
            const auto r = verify_packing(bu, Exponent(t.p), kTableTol);
            CHECK(std::fabs(r.min_norm - base.min_norm) <= 1e-9);
        }
    }
}

TEST_CASE("density scales with the inverse cube")
{
    const Basis b = case_three_at(1.3).basis();
    for (double s : {0.5, 2.0, 3.7}) {
        CHECK(density(scaled(b, s), Exponent(1.3)) ==
              doctest::Approx(density(b, Exponent(1.3)) / (s * s * s)).epsilon(1e-12));
    }
}

TEST_CASE("enumeration bound is sound on random bases")
{
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> pd(1.0, 3.0);
    int tested = 0;
    while (tested < 100) {
        Eigen::Matrix3d m;
        for (int i = 0; i < 9; ++i) {
            m(i / 3, i % 3) = g(rng);
        }
        if (std::fabs(m.determinant()) < 0.05) {
            continue;
        }
        ++tested;
        const Basis b(m);
        const Exponent p(pd(rng));
        const double mu = 1.0;
        const IntVec3 box = enumeration_bound(b, p, mu);
        for (int a = -box[0] - 1; a <= box[0] + 1; ++a) {
            for (int c = -box[1] - 1; c <= box[1] + 1; ++c) {
                for (int d = -box[2] - 1; d <= box[2] + 1; ++d) {
                    const bool inside = std::abs(a) <= box[0] && std::abs(c) <= box[1] && std::abs(d) <= box[2];
                    if (!inside) {
                        REQUIRE(lp_norm(b.apply({a, c, d}), p) > mu);
                    }
                }
            }
        }
    }
}

TEST_CASE("parse_basis accepts JSON and plain text")
{
    const auto obj = parse_basis(R"({"matrix": [1,0,0, 0,1,0, 0,0,2], "p": 1.5})");
    CHECK(obj.basis.det() == doctest::Approx(2.0));
    REQUIRE(obj.p.has_value());
    CHECK(*obj.p == 1.5);

    const auto arr = parse_basis(R"([{"matrix": [2,0,0, 0,1,0, 0,0,1]}, {"matrix": [1,0,0,0,1,0,0,0,1]}])");
    CHECK(arr.basis.det() == doctest::Approx(2.0));
    CHECK_FALSE(arr.p.has_value());

    const auto txt = parse_basis("1 2 0\n0 1 0\n0 0 3\n");
    CHECK(txt.basis.matrix()(0, 1) == 2.0);
    CHECK(txt.basis.det() == doctest::Approx(3.0));
}

TEST_CASE("parse_basis errors")
{
    CHECK_THROWS(parse_basis("1 2 3"));
    CHECK_THROWS(parse_basis("1 0 0 0 1 0 0 0 abc"));
    CHECK_THROWS(parse_basis(R"({"matrix": [1,2,3]})"));
    CHECK_THROWS(parse_basis("0 0 0 0 0 0 0 0 0"));
    CHECK_THROWS(parse_basis("{not json"));
    CHECK_THROWS(read_basis_file("/nonexistent/basis.json"));
}

TEST_CASE("read_basis_file round trip")
{
    const std::string path = "test_lattice_basis.txt";
    {
        std::ofstream f(path);
        f << "-0.333333333333 0.166666666667 0.5 0.5 -0.333333333333 0.166666666667 0.166666666667 0.5 "
             "-0.333333333333\n";
    }
    const auto r = read_basis_file(path);
    CHECK(std::fabs(density(r.basis, Exponent(1.0)) - 18.0 / 19.0) <= 1e-10);
    std::remove(path.c_str());
}
