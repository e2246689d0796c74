#include "superpack/family.hpp"

#include "tables.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace superpack;
using superpack::testdata::case_three_at;
using superpack::testdata::case_three_matrices;

namespace {

double vec_sup(const Vec3& v)
{
    return std::max({std::fabs(v[0]), std::fabs(v[1]), std::fabs(v[2])});
}

}  // namespace

TEST_CASE("family matrix examples")
{
    const Basis l1 = family_matrix(1.0 / 3, 1.0 / 6, 0.5);
    const auto t1 = case_three_at(1.0).rows;
    const auto r1 = l1.row_major();
    for (int i = 0; i < 9; ++i) {
        CHECK(std::fabs(r1[i] - t1[i]) <= 1e-12);
    }
    const auto bcc = family_matrix(0.5, 0.5, 0.5).row_major();
    const std::array<double, 9> expect{-0.5, 0.5, 0.5, 0.5, -0.5, 0.5, 0.5, 0.5, -0.5};
    CHECK(bcc == expect);

    const auto r13 = family_matrix(0.419839537546, 0.260336714788, 0.589023079183).row_major();
    const auto t13 = case_three_at(1.3).rows;
    for (int i = 0; i < 9; ++i) {
        CHECK(std::fabs(r13[i] - t13[i]) <= 1e-9 + 5e-11);
    }
}

TEST_CASE("family system examples")
{
    CHECK(vec_sup(family_system(Exponent(1.0), 1.0 / 3, 1.0 / 6, 0.5)) <= 1e-15);
    const Vec3 end = family_system(Exponent(kLog2Of3), 0.5, 0.5, 0.5);
    CHECK(std::fabs(end[0]) <= 1e-15);
    CHECK(std::fabs(end[2]) <= 1e-15);
    // (x-y)^p + (z-x)^p + (y+z)^p - 1 = 0 + 0 + 1 - 1.
    CHECK(std::fabs(end[1]) <= 1e-15);
    CHECK(vec_sup(family_system(Exponent(1.5), 0.475292821919, 0.375983627555, 0.580059051165)) <= 1e-9);
    CHECK_THROWS_AS(family_system(Exponent(1.5), 0.5, 0.6, 0.7), FamilyDomainError);
}

TEST_CASE("family Jacobian special values")
{
    const auto j2 = family_jacobian(Exponent(2.0), 0.4, 0.2, 0.6);
    CHECK(j2[0][0] == doctest::Approx(0.8));
    CHECK(j2[0][1] == doctest::Approx(0.4));
    CHECK(j2[0][2] == doctest::Approx(1.2));
    CHECK(j2[2][0] == doctest::Approx(-6.0 * 0.4));

    const auto j1 = family_jacobian(Exponent(1.0), 1.0 / 3, 1.0 / 6, 0.5);
    CHECK(j1[0][0] == 1.0);
    CHECK(j1[1][0] == 0.0);
    CHECK(j1[1][1] == 0.0);
    CHECK(j1[1][2] == 2.0);
    CHECK(j1[2][0] == -3.0);

    // At the endpoint the second column equals the third: the matrix is singular.
    const auto je = family_jacobian(Exponent(kLog2Of3), 0.5, 0.5, 0.5);
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) {
            m(i, k) = je[i][k];
        }
    }
    CHECK(std::fabs(m.determinant()) <= 1e-12);
    // x - y = z - x = 0 there, so the middle row is p (0, 1, 1).
    const double c = kLog2Of3 * std::pow(0.5, kLog2Of3 - 1.0);
    CHECK(je[0][0] == doctest::Approx(c));
    CHECK(je[1][0] == 0.0);
    CHECK(je[1][1] == doctest::Approx(kLog2Of3));
    CHECK(je[1][2] == doctest::Approx(kLog2Of3));
    CHECK(je[2][1] == doctest::Approx(3.0 * c));
    CHECK(je[2][0] == doctest::Approx(-3.0 * c));
}

TEST_CASE("family Jacobian matches central differences")
{
    auto check_at = [](double p, double x, double y, double z, double h) {
        const auto jac = family_jacobian(Exponent(p), x, y, z);
        double worst = 0.0;
        for (int k = 0; k < 3; ++k) {
            Vec3 a{x, y, z}, b{x, y, z};
            a[k] += h;
            b[k] -= h;
            const Vec3 fa = family_system(Exponent(p), a[0], a[1], a[2]);
            const Vec3 fb = family_system(Exponent(p), b[0], b[1], b[2]);
            for (int i = 0; i < 3; ++i) {
                worst = std::max(worst, std::fabs((fa[i] - fb[i]) / (2 * h) - jac[i][k]));
            }
        }
        return worst;
    };
    CHECK(check_at(1.2, 0.39, 0.22, 0.57, 1e-7) <= 1e-6);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> pd(1.05, 2.0);
    std::uniform_real_distribution<double> yd(0.05, 0.3);
    std::uniform_real_distribution<double> gap(0.05, 0.25);
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
        const double y = yd(rng);
        const double x = y + gap(rng);
        const double z = x + gap(rng);
        worst = std::max(worst, check_at(pd(rng), x, y, z, 1e-6));
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("family determinant closed form")
{
    CHECK(family_det(1.0 / 3, 1.0 / 6, 0.5) == doctest::Approx(19.0 / 108.0).epsilon(1e-14));
    CHECK(family_det(0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(family_det(0.0, 0.0, 1.0) == 1.0);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng), y = u(rng), z = u(rng);
        const double d = family_det(x, y, z);
        CHECK(family_matrix(x, y, z).det() == doctest::Approx(d).epsilon(1e-12));
    }
}

TEST_CASE("solve_family examples")
{
    const auto s1 = solve_family(Exponent(1.0), {0.3, 0.2, 0.5});
    REQUIRE(s1.ok());
    CHECK(std::fabs(s1.point.x - 1.0 / 3) <= 1e-10);
    CHECK(std::fabs(s1.point.y - 1.0 / 6) <= 1e-10);
    CHECK(std::fabs(s1.point.z - 0.5) <= 1e-10);
    CHECK(s1.point.residual <= 1e-11);

    const auto s11 = solve_family(Exponent(1.1), {s1.point.x, s1.point.y, s1.point.z});
    REQUIRE(s11.ok());
    CHECK(std::fabs(s11.point.x - 0.364125450067) <= 1e-8);
    CHECK(std::fabs(s11.point.y - 0.193419513868) <= 1e-8);
    CHECK(std::fabs(s11.point.z - 0.539049770666) <= 1e-8);

    CHECK_THROWS_AS(solve_family(Exponent(1.1), {0.2, 0.3, 0.5}), std::invalid_argument);
}

TEST_CASE("continuation reaches the endpoint region")
{
    const auto near_end = family_point_at(kFamilyContinuationEnd);
    REQUIRE(near_end.has_value());
    CHECK(std::fabs(near_end->x - 0.5) <= 1e-3);
    CHECK(std::fabs(near_end->y - 0.5) <= 1e-3);
    CHECK(std::fabs(near_end->z - 0.5) <= 1e-3);
    const auto end = family_point_at(kLog2Of3);
    REQUIRE(end.has_value());
    CHECK(end->x == 0.5);
    CHECK(end->y == 0.5);
    CHECK(end->z == 0.5);
}

TEST_CASE("continuation matches the printed matrices")
{
    std::vector<double> ps;
    for (const auto& t : case_three_matrices()) {
        ps.push_back(t.p);
    }
    const auto pts = continue_family(ps);
    REQUIRE(pts.size() == ps.size());
    for (std::size_t k = 0; k < ps.size(); ++k) {
        REQUIRE(pts[k].has_value());
        const auto& r = case_three_matrices()[k].rows;
        CHECK(std::fabs(pts[k]->x + r[0]) <= 1e-8);
        CHECK(std::fabs(pts[k]->y - r[1]) <= 1e-8);
        CHECK(std::fabs(pts[k]->z - r[2]) <= 1e-8);
    }
    // Unordered requests are answered per entry.
    const auto rev = continue_family({1.5, 1.0});
    REQUIRE(rev[0].has_value());
    CHECK(rev[0]->x == doctest::Approx(pts.back()->x).epsilon(1e-12));
    CHECK(rev[1]->x == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("family members: circulant symmetry, Case III equalities, packing, 14 neighbors")
{
    std::vector<double> ps;
    for (int k = 0; k <= 58; ++k) {
        ps.push_back(1.0 + k / 100.0);
    }
    ps.push_back(kFamilyContinuationEnd);
    const auto pts = continue_family(ps);
    for (std::size_t k = 0; k < ps.size(); ++k) {
        REQUIRE(pts[k].has_value());
        const auto& pt = *pts[k];
        const Exponent p(ps[k]);
        CHECK(in_family_region(pt.x, pt.y, pt.z));
        CHECK(pt.residual <= 1e-11);
        const Basis l = family_matrix(pt);

        double dev = 0.0;
        for (const auto& u : neighbor_case(CaseId::III).representatives) {
            dev = std::max(dev, std::fabs(lp_norm(l.apply(u), p) - 1.0));
        }
        CHECK(dev <= 1e-9);

        const IntVec3 box = enumeration_bound(l, p, 1.0 + kDefaultTol);
        const int r = std::max({box[0], box[1], box[2]});
        for (int a = -r; a <= r; ++a) {
            for (int b = -r; b <= r; ++b) {
                for (int c = -r; c <= r; ++c) {
                    REQUIRE(lp_norm(l.apply({a, b, c}), p) ==
                            doctest::Approx(lp_norm(l.apply({c, a, b}), p)).epsilon(1e-13));
                }
            }
        }
        if (ps[k] > 1.0) {
            CHECK(verify_packing(l, p).is_packing);
        }
        if (ps[k] < kFamilyContinuationEnd) {
            CHECK(count_neighbors(l, p) == 14);
        }
    }
}

TEST_CASE("family table densities decrease and match the printed values")
{
    const std::vector<double> grid{1.0, 1.1, 1.2, 1.3, 1.4, 1.5, kFamilyContinuationEnd};
    const auto table = family_table(grid);
    REQUIRE(table.size() == grid.size());
    for (std::size_t k = 0; k < table.size(); ++k) {
        REQUIRE(table[k].ok);
        CHECK(table[k].det == doctest::Approx(family_det(table[k].point.x, table[k].point.y, table[k].point.z)));
        if (k < testdata::kFamilyDensities.size()) {
            CHECK(std::fabs(table[k].density - testdata::kFamilyDensities[k]) <= 1e-4);
            CHECK(table[k].neighbors == 14);
        }
        if (k > 0) {
            CHECK(table[k].density < table[k - 1].density);
        }
    }
    CHECK(std::fabs(table[0].density - 18.0 / 19.0) <= 1e-10);
}
