#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "twinlab/crystallography.hpp"

using namespace twinlab;

namespace {
const double kSqrt2Inv = 1.0 / std::sqrt(2.0);
}

TEST_CASE("well strains match the tetragonal table") {
    CHECK(well_strain(PhaseIndex(0)).max_abs_diff(SymmetricTensor3::zero()) == 0.0);
    CHECK(well_strain(PhaseIndex(1)).max_abs_diff(SymmetricTensor3::diagonal(-2, 1, 1)) == 0.0);
    CHECK(well_strain(PhaseIndex(2)).max_abs_diff(SymmetricTensor3::diagonal(1, -2, 1)) == 0.0);
    CHECK(well_strain(PhaseIndex(3)).max_abs_diff(SymmetricTensor3::diagonal(1, 1, -2)) == 0.0);

    for (int i = 0; i < 4; ++i) CHECK(well_strain(PhaseIndex(i)).trace() == 0.0);
}

TEST_CASE("the six normals match the (110) table verbatim") {
    CHECK((twin_normal(1, +1).components - Vec3(0, kSqrt2Inv, kSqrt2Inv)).norm() < 1e-15);
    CHECK((twin_normal(1, -1).components - Vec3(0, kSqrt2Inv, -kSqrt2Inv)).norm() < 1e-15);
    CHECK((twin_normal(2, +1).components - Vec3(kSqrt2Inv, 0, kSqrt2Inv)).norm() < 1e-15);
    CHECK((twin_normal(2, -1).components - Vec3(-kSqrt2Inv, 0, kSqrt2Inv)).norm() < 1e-15);
    CHECK((twin_normal(3, +1).components - Vec3(kSqrt2Inv, kSqrt2Inv, 0)).norm() < 1e-15);
    CHECK((twin_normal(3, -1).components - Vec3(kSqrt2Inv, -kSqrt2Inv, 0)).norm() < 1e-15);

    for (const auto& nu : all_twin_normals()) CHECK(std::abs(nu.components.norm() - 1.0) < 1e-15);

    // orthogonality within each pair, non-parallel across all pairs
    for (int p = 1; p <= 3; ++p)
        CHECK(std::abs(twin_normal(p, +1).components.dot(twin_normal(p, -1).components)) < 1e-15);
    const auto& all = all_twin_normals();
    for (std::size_t m = 0; m < 6; ++m)
        for (std::size_t n = m + 1; n < 6; ++n)
            CHECK(all[m].components.cross(all[n].components).norm() > 0.5);
}

TEST_CASE("rank-one reconstruction holds entrywise to 1e-14 for all ordered pairs") {
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
            if (i == j) continue;
            const auto d = rank_one_decompose(PhaseIndex(i), PhaseIndex(j));
            const SymmetricTensor3 lhs = well_strain(PhaseIndex(j)) - well_strain(PhaseIndex(i));
            const SymmetricTensor3 rhs =
                d.scale * SymmetricTensor3::sym_outer(d.nu_plus.components, d.nu_minus.components);
            CHECK(lhs.max_abs_diff(rhs) < 1e-14);
            CHECK(d.nu_plus.pair_index == 6 - i - j);
            CHECK(d.nu_minus.pair_index == 6 - i - j);
        }
}

TEST_CASE("rank-one decomposition: canonical pairs and reversed sign convention") {
    const auto d12 = rank_one_decompose(PhaseIndex(1), PhaseIndex(2));
    CHECK(d12.nu_plus.pair_index == 3);
    CHECK(d12.scale == 6.0);
    // 6 nu3+ (.) nu3- = diag(3,-3,0) = e_2 - e_1
    const SymmetricTensor3 rec =
        6.0 * SymmetricTensor3::sym_outer(d12.nu_plus.components, d12.nu_minus.components);
    CHECK(rec.max_abs_diff(SymmetricTensor3::diagonal(3, -3, 0)) < 1e-14);

    const auto d23 = rank_one_decompose(PhaseIndex(2), PhaseIndex(3));
    CHECK(d23.nu_plus.pair_index == 1);
    CHECK(d23.scale == 6.0);

    const auto d21 = rank_one_decompose(PhaseIndex(2), PhaseIndex(1));
    CHECK(d21.scale == -6.0);
    CHECK(d21.nu_plus.pair_index == 3);
    CHECK(d21.nu_plus.sign == +1);  // normals stay canonical per pair

    CHECK_THROWS(rank_one_decompose(PhaseIndex(1), PhaseIndex(1)));
    CHECK_THROWS(rank_one_decompose(PhaseIndex(0), PhaseIndex(1)));
}

TEST_CASE("admissible normals run over the two conjugate pairs") {
    const auto n1 = admissible_normals(PhaseIndex(1));
    CHECK(n1[0].pair_index == 2);
    CHECK(n1[1].pair_index == 2);
    CHECK(n1[2].pair_index == 3);
    CHECK(n1[3].pair_index == 3);
    const auto n2 = admissible_normals(PhaseIndex(2));
    CHECK(n2[0].pair_index == 3);
    CHECK(n2[2].pair_index == 1);
    const auto n3 = admissible_normals(PhaseIndex(3));
    CHECK(n3[0].pair_index == 1);
    CHECK(n3[2].pair_index == 2);
    CHECK_THROWS(admissible_normals(PhaseIndex(0)));
}

TEST_CASE("phase index cycling") {
    CHECK(PhaseIndex(1).next() == PhaseIndex(2));
    CHECK(PhaseIndex(3).next() == PhaseIndex(1));
    CHECK(PhaseIndex(1).prev() == PhaseIndex(3));
    CHECK_THROWS(PhaseIndex(0).next());
    CHECK_THROWS(PhaseIndex(4));
}

TEST_CASE("diagonal gradient from fractions") {
    const VolumeFractions t1(Vec4(0.0, 1.0 / 3.0, 2.0 / 3.0, 0.0));
    CHECK((diagonal_gradient_from_fractions(t1) - Vec3(0, -1, 1)).norm() < 1e-15);
    // cross-check: diagonal of (1/3) e_1 + (2/3) e_2
    const SymmetricTensor3 mix =
        (1.0 / 3.0) * well_strain(PhaseIndex(1)) + (2.0 / 3.0) * well_strain(PhaseIndex(2));
    CHECK(std::abs(mix(0, 0) - 0.0) < 1e-15);
    CHECK(std::abs(mix(1, 1) + 1.0) < 1e-15);
    CHECK(std::abs(mix(2, 2) - 1.0) < 1e-15);

    CHECK((diagonal_gradient_from_fractions(VolumeFractions::pure(PhaseIndex(0))) -
           Vec3(0, 0, 0)).norm() < 1e-15);
    CHECK((diagonal_gradient_from_fractions(VolumeFractions::pure(PhaseIndex(1))) -
           Vec3(-2, 1, 1)).norm() < 1e-15);
}

TEST_CASE("diagonal gradient is affine and maps unit fractions to the well diagonals") {
    // affinity: g(lerp(ta, tb)) = lerp(g(ta), g(tb))
    const Vec4 ta(0.1, 0.2, 0.3, 0.4), tb(0.25, 0.25, 0.25, 0.25);
    for (double w : {0.0, 0.3, 0.7, 1.0}) {
        const Vec4 mix = (1.0 - w) * ta + w * tb;
        const Vec3 lhs = diagonal_gradient_from_fractions(VolumeFractions(mix));
        const Vec3 rhs = (1.0 - w) * diagonal_gradient_from_fractions(VolumeFractions(ta)) +
                         w * diagonal_gradient_from_fractions(VolumeFractions(tb));
        CHECK((lhs - rhs).norm() < 1e-14);
    }
    for (int i = 0; i < 4; ++i) {
        const Vec3 g = diagonal_gradient_from_fractions(VolumeFractions::pure(PhaseIndex(i)));
        const SymmetricTensor3 e = well_strain(PhaseIndex(i));
        CHECK((g - Vec3(e(0, 0), e(1, 1), e(2, 2))).norm() < 1e-15);
    }
}

TEST_CASE("volume fractions validate range and sum") {
    CHECK_THROWS(VolumeFractions(Vec4(0.5, 0.5, 0.5, -0.5)));
    CHECK_THROWS(VolumeFractions(Vec4(0.5, 0.2, 0.2, 0.2)));
    CHECK_NOTHROW(VolumeFractions(Vec4(0.25, 0.25, 0.25, 0.25)));
}
