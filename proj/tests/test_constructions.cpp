#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "twinlab/constructions.hpp"

using namespace twinlab;

namespace {

BoxDomain laminate_box(const LaminateSpec& spec, int n) {
    return BoxDomain(Vec3::Zero(), Vec3::Ones(), {n, n, n}, laminate_frame(spec.normal));
}

// worst displacement jump across randomly sampled nearby point pairs
double max_jump(const DisplacementField& u, const BoxDomain& d, std::mt19937_64& rng,
                int pairs, double eps) {
    std::uniform_real_distribution<double> uni(0.05, 0.95);
    std::normal_distribution<double> gauss;
    double worst = 0.0;
    for (int m = 0; m < pairs; ++m) {
        Vec3 g(uni(rng) * d.extent()[0], uni(rng) * d.extent()[1], uni(rng) * d.extent()[2]);
        const Vec3 x = d.lab_from_grid(g);
        Vec3 step(gauss(rng), gauss(rng), gauss(rng));
        step.normalize();
        const Vec3 a = u.sample(x - 0.5 * eps * step);
        const Vec3 b = u.sample(x + 0.5 * eps * step);
        // subtract the largest admissible gradient action to isolate jumps
        worst = std::max(worst, ((b - a).norm() - 10.0 * eps));
    }
    return worst;
}

}  // namespace

// ---------------------------------------------------------------------------
// simple laminate
// ---------------------------------------------------------------------------

TEST_CASE("laminate fractions average to (f, 1-f) over whole periods") {
    LaminateSpec spec;
    spec.fraction = 1.0 / 3.0;
    spec.period = 0.25;  // 4 whole periods across the box
    const BoxDomain d = laminate_box(spec, 48);
    const auto b = simple_laminate(spec, d, 0.1);
    const Vec4 frac = b.ms.chi.phase_fractions();
    CHECK(frac[1] == doctest::Approx(1.0 / 3.0).epsilon(1.0 / 48.0 * 4));
    CHECK(frac[2] == doctest::Approx(2.0 / 3.0).epsilon(1.0 / 48.0 * 4));
    CHECK(frac[0] == 0.0);
    CHECK(frac[3] == 0.0);

    const Vec4 th = b.theta(Vec3::Zero());
    CHECK(th[1] == doctest::Approx(1.0 / 3.0));
    CHECK(th[2] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("laminate strain lies in the two wells and u is continuous") {
    LaminateSpec spec;
    spec.fraction = 0.4;
    spec.period = 0.2;
    const BoxDomain d = laminate_box(spec, 32);
    const auto b = simple_laminate(spec, d, 0.1);

    const Mat3 e1 = well_strain(PhaseIndex(1)).to_matrix();
    const Mat3 e2 = well_strain(PhaseIndex(2)).to_matrix();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int m = 0; m < 500; ++m) {
        const Vec3 x = d.lab_from_grid(Vec3(uni(rng), uni(rng), uni(rng)));
        const Mat3 g = b.ms.u.gradient_sample(x);
        const Mat3 sym = 0.5 * (g + g.transpose());
        const double d1 = (sym - e1).norm();
        const double d2 = (sym - e2).norm();
        CHECK(std::min(d1, d2) < 1e-12);
        const int phase = b.ms.phase_sampler(x);
        CHECK((phase == 1 ? d1 : d2) < 1e-12);
    }

    // continuity across interfaces: jumps of the sampled displacement vanish
    // with the sampling distance
    std::mt19937_64 rng2(17);
    CHECK(max_jump(b.ms.u, d, rng2, 4000, 1e-9) <= 1e-12 * d.diameter());
}

TEST_CASE("laminate with fraction 1/2 and two periods has four interfaces") {
    LaminateSpec spec;
    spec.fraction = 0.5;
    spec.period = 0.5;
    const BoxDomain d = laminate_box(spec, 32);
    const auto b = simple_laminate(spec, d, 1.0);
    const ScalarField chi1 = b.ms.chi.indicator(PhaseIndex(1));
    CHECK(total_variation(chi1) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("laminate rejects invalid specs") {
    LaminateSpec spec;
    spec.fraction = 0.5;
    const BoxDomain good = laminate_box(spec, 8);
    spec.fraction = 1.5;
    CHECK_THROWS(simple_laminate(spec, good, 1.0));
    spec.fraction = 0.5;
    spec.normal = twin_normal(1, +1);  // wrong pair for variants (1,2)
    CHECK_THROWS(simple_laminate(spec, good, 1.0));
    spec.normal = twin_normal(3, +1);
    // misaligned frame
    const BoxDomain bad(Vec3::Zero(), Vec3::Ones(), {8, 8, 8});
    CHECK_THROWS(simple_laminate(spec, bad, 1.0));
}

// ---------------------------------------------------------------------------
// checkerboard
// ---------------------------------------------------------------------------

TEST_CASE("checkerboard with half-period square waves yields the four regions") {
    CheckerboardSpec spec;
    spec.variant_i = 1;
    spec.nu_next = twin_normal(2, +1);
    spec.nu_prev = twin_normal(3, +1);
    spec.a = 0.5;
    spec.b = 0.5;
    spec.set_A = {0.4, 0.5, 0.0};
    spec.set_B = {0.3, 0.5, 0.0};
    const BoxDomain d(Vec3::Zero(), Vec3::Ones(), {24, 24, 24});
    const auto b = checkerboard(spec, d);

    // the four regions partition the domain
    for (std::size_t c = 0; c < d.cell_count(); ++c) {
        double s = 0.0;
        for (int r = 0; r < 4; ++r) s += b.regions[static_cast<std::size_t>(r)].samples()[c];
        CHECK(s == 1.0);
    }
    // theta values per region match the displayed system
    const auto& n = d.resolution();
    for (int i = 0; i < n[0]; i += 3)
        for (int j = 0; j < n[1]; j += 3)
            for (int k = 0; k < n[2]; k += 3) {
                const double t1 = b.theta[1].at(i, j, k);
                const double t2 = b.theta[2].at(i, j, k);
                const double t3 = b.theta[3].at(i, j, k);
                CHECK(t1 + t2 + t3 == doctest::Approx(1.0).epsilon(1e-14));
                if (b.regions[0].at(i, j, k) == 1.0) {
                    CHECK(t1 == doctest::Approx(0.0));
                    CHECK(t2 == doctest::Approx(0.5));
                    CHECK(t3 == doctest::Approx(0.5));
                } else if (b.regions[1].at(i, j, k) == 1.0) {
                    CHECK(t1 == doctest::Approx(0.5));
                    CHECK(t2 == doctest::Approx(0.5));
                    CHECK(t3 == doctest::Approx(0.0));
                } else if (b.regions[2].at(i, j, k) == 1.0) {
                    CHECK(t1 == doctest::Approx(0.5));
                    CHECK(t2 == doctest::Approx(0.0));
                    CHECK(t3 == doctest::Approx(0.5));
                } else {
                    CHECK(t1 == doctest::Approx(1.0));
                }
            }
}

TEST_CASE("checkerboard with empty sets is the pure variant") {
    CheckerboardSpec spec;
    spec.set_A = {1.0, 0.0, 0.0};  // empty
    spec.set_B = {1.0, 0.0, 0.0};
    spec.a = 0.25;
    spec.b = 0.75;
    const BoxDomain d(Vec3::Zero(), Vec3::Ones(), {8, 8, 8});
    const auto b = checkerboard(spec, d);
    for (double v : b.theta[1].samples()) CHECK(v == doctest::Approx(1.0));
    for (double v : b.theta[2].samples()) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("checkerboard rejects a + b != 1") {
    CheckerboardSpec spec;
    spec.a = 0.5;
    spec.b = 0.6;
    const BoxDomain d(Vec3::Zero(), Vec3::Ones(), {4, 4, 4});
    CHECK_THROWS(checkerboard(spec, d));
}

// ---------------------------------------------------------------------------
// branched habit plane: closed-form oracle first
// ---------------------------------------------------------------------------

TEST_CASE("per-generation energies: successive ratios are constant for geometric profiles") {
    const double eta = 1e-3;
    auto layers = branch_layer_energies(
        1.0, 0.5, [](int l) { return 0.3 * std::pow(0.63, l); }, eta, 8);
    for (int l = 0; l + 1 < 8; ++l) {
        const double re = layers[l + 1].elastic / layers[l].elastic;
        const double ri = layers[l + 1].interfacial / layers[l].interfacial;
        CHECK(re == doctest::Approx(0.25 / 0.63).epsilon(1e-12));  // rho_p^2 / rho_H
        CHECK(ri == doctest::Approx(0.63 / 0.5).epsilon(1e-12));   // rho_H / rho_p
    }
    // elastic scales like period^2 / thickness per unit area
    for (int l = 0; l < 8; ++l) {
        const double expect = std::pow(eta, -2.0 / 3.0) * (22.5 / 108.0) *
                              layers[l].period * layers[l].period / layers[l].thickness;
        CHECK(layers[l].elastic == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("equipartition thickness balances the two layer energies and keeps the tower bounded") {
    const double eta = 1e-4;
    auto totals = [&](int depth) {
        auto layers = branch_layer_energies(
            0.25, 0.5, [&](int l) { return equipartition_thickness(0.25 * std::pow(0.5, l), eta); },
            eta, depth);
        double e = 0.0;
        for (const auto& L : layers) {
            CHECK(L.elastic == doctest::Approx(L.interfacial).epsilon(1e-10));
            e += L.elastic + L.interfacial;
        }
        return e;
    };
    const double e10 = totals(10), e20 = totals(20), e40 = totals(40);
    // geometric tail: doubling the depth adds a vanishing increment
    CHECK(e20 - e10 < 0.05 * e10);
    CHECK(e40 - e20 < 0.01 * e10);
}

TEST_CASE("branched habit plane matches the hypotheses of the blow-up setting") {
    BranchTreeSpec spec;
    spec.depth = 4;
    spec.base_period = 0.5;
    spec.tower_height = 0.4;
    const BoxDomain d = make_branch_domain(spec, 384, 384);
    const auto b = branched_habit_plane(spec, d, suggested_eta(spec));

    SUBCASE("theta_3 vanishes and theta_0 is the austenite half-space") {
        const Vec4 below = b.theta(-0.1 * b.habit_normal);
        CHECK(below[0] == 1.0);
        const Vec4 above = b.theta(0.1 * b.habit_normal);
        CHECK(above[0] == 0.0);
        CHECK(above[1] == doctest::Approx(1.0 / 3.0));
        CHECK(above[2] == doctest::Approx(2.0 / 3.0));
        CHECK(above[3] == 0.0);
        // cellwise: no variant 3 anywhere, austenite exactly below the plane
        const auto& n = d.resolution();
        for (int i = 0; i < n[0]; i += 7)
            for (int j = 0; j < n[1]; j += 7) {
                const int phase = b.ms.chi.at(i, j, 0);
                CHECK(phase != 3);
                const double s = d.cell_center(i, j, 0).dot(b.habit_normal);
                if (s <= 0.0) CHECK(phase == 0);
                else CHECK(phase >= 1);
            }
    }

    SUBCASE("volume fractions above the plane are close to (1/3, 2/3)") {
        // count over cells safely above the plane
        const auto& n = d.resolution();
        std::size_t c1 = 0, c2 = 0;
        for (int i = 0; i < n[0]; ++i)
            for (int j = 0; j < n[1]; ++j) {
                const double s = d.cell_center(i, j, 0).dot(b.habit_normal);
                if (s < 0.02) continue;
                const int phase = b.ms.chi.at(i, j, 0);
                if (phase == 1) ++c1;
                if (phase == 2) ++c2;
            }
        const double f1 = static_cast<double>(c1) / (c1 + c2);
        CHECK(f1 == doctest::Approx(1.0 / 3.0).epsilon(0.02));
    }

    SUBCASE("displacement is continuous across twin interfaces, layers and the habit plane") {
        std::mt19937_64 rng(23);
        CHECK(max_jump(b.ms.u, d, rng, 6000, 1e-9) <= 1e-12 * d.diameter());
    }

    SUBCASE("strain misfit is a pure shear along conjugate-normal x habit-normal") {
        const Mat3 e1 = well_strain(PhaseIndex(1)).to_matrix();
        const Mat3 e2 = well_strain(PhaseIndex(2)).to_matrix();
        const Vec3 n3c = spec.twin_normal.conjugate().components;
        Mat3 shear = 0.5 * (n3c * b.habit_normal.transpose() +
                            b.habit_normal * n3c.transpose());
        shear /= shear.norm();
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> uni(0.05, 0.95);
        for (int m = 0; m < 400; ++m) {
            Vec3 g(uni(rng) * d.extent()[0], uni(rng) * d.extent()[1], 0.5 * d.extent()[2]);
            const Vec3 x = d.lab_from_grid(g);
            // below taper_depth the tapered oscillation adds a second misfit term
            if (x.dot(b.habit_normal) <= b.taper_depth + 1e-6) continue;
            const Mat3 gr = b.ms.u.gradient_sample(x);
            const Mat3 sym = 0.5 * (gr + gr.transpose());
            const int phase = b.ms.phase_sampler(x);
            const Mat3 misfit = sym - ((phase == 1) ? e1 : e2);
            // remove the component along the shear direction; the rest vanishes
            const Mat3 rest = misfit - misfit.cwiseProduct(shear).sum() * shear;
            CHECK(rest.norm() < 1e-10);
        }
    }

    SUBCASE("plain laminate zone above the tower is stress-free") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> uni(0.1, 0.9);
        const Mat3 e1 = well_strain(PhaseIndex(1)).to_matrix();
        const Mat3 e2 = well_strain(PhaseIndex(2)).to_matrix();
        int checked = 0;
        for (int m = 0; m < 3000 && checked < 100; ++m) {
            Vec3 g(uni(rng) * d.extent()[0], uni(rng) * d.extent()[1], 0.0);
            const Vec3 x = d.lab_from_grid(g);
            if (x.dot(b.habit_normal) <= spec.tower_height + 0.01) continue;
            ++checked;
            const Mat3 gr = b.ms.u.gradient_sample(x);
            const Mat3 sym = 0.5 * (gr + gr.transpose());
            const double miss = std::min((sym - e1).norm(), (sym - e2).norm());
            CHECK(miss < 1e-12);
        }
        CHECK(checked > 0);
    }
}

TEST_CASE("grid energies agree with the closed-form layer oracle") {
    BranchTreeSpec spec;
    spec.depth = 4;
    spec.base_period = 0.5;
    spec.tower_height = 0.4;
    const double eta = suggested_eta(spec);
    const BoxDomain d = make_branch_domain(spec, 512, 512);
    const auto b = branched_habit_plane(spec, d, eta);
    const auto e = total_energy(b.ms);

    double oracle_elastic = 0.0, oracle_inter = 0.0;
    for (const auto& L : b.layers) {
        oracle_elastic += L.elastic;
        oracle_inter += L.interfacial;
    }
    // cross-section area of the oblique structure per unit habit area: the
    // domain is one unit wide along the twin axis and extruded by extent2
    const double area = d.extent()[0] * d.extent()[2];
    // interfacial also includes the frozen zone below the tower and the plain
    // laminate above it; both are fine-period laminates with 4 faces per period
    const double sN = b.taper_depth;
    const double pN = spec.base_period * std::pow(spec.period_ratio, spec.depth);
    const double s_max_above = 0.0;  // plain-zone extent varies per tau; bounded below
    (void)s_max_above;
    const double frozen_inter = std::pow(eta, 1.0 / 3.0) * 4.0 * sN / pN;

    CHECK(e.elastic / area ==
          doctest::Approx(oracle_elastic).epsilon(0.25));
    CHECK(e.interfacial / area > oracle_inter + frozen_inter * 0.5);
}

TEST_CASE("branch construction rejects unresolvable depth") {
    BranchTreeSpec spec;
    spec.depth = 9;
    spec.base_period = 0.5;
    const BoxDomain d = make_branch_domain(spec, 128, 128);
    CHECK_THROWS(branched_habit_plane(spec, d, 1e-3));
}

// ---------------------------------------------------------------------------
// clustering
// ---------------------------------------------------------------------------

TEST_CASE("cantor endpoints are exact for dyadic ratios") {
    const auto pts = cantor_endpoints(0.25, 2, 0.0, 1.0);
    const std::vector<double> expect{0.0,    0.0625, 0.1875, 0.25,
                                     0.75,   0.8125, 0.9375, 1.0};
    REQUIRE(pts.size() == expect.size());
    for (std::size_t m = 0; m < pts.size(); ++m) CHECK(pts[m] == expect[m]);
}

TEST_CASE("generation 1 produces two large-scale interfaces") {
    ClusterSpec spec;
    spec.epsilon = 1.0 / 3.0;  // trace dimension 1/3, ratio 1/8
    spec.generations = 1;
    spec.period_coupling = 0.5;
    const BoxDomain d = make_cluster_domain(spec, 512, 64);
    const auto b = clustering_laminate(spec, d, 1e-4);
    CHECK(b.interface_positions.size() == 2);
    CHECK(spec.cantor_ratio() == doctest::Approx(0.125).epsilon(1e-14));
}

TEST_CASE("clustering laminate is stress-free with exact Cantor trace") {
    ClusterSpec spec;
    spec.epsilon = 1.0 / 3.0;
    spec.generations = 2;
    spec.period_coupling = 0.35;
    const BoxDomain d = make_cluster_domain(spec, 1024, 32);
    const double eta = 1e-3;  // finest segment period stays above 4 cells
    const auto b = clustering_laminate(spec, d, eta);

    // trace reproduces the Cantor iteration bit-exactly
    const double margin = 0.05;
    const auto expect_all = cantor_endpoints(0.125, 2, margin, 1.0 - margin);
    REQUIRE(b.interface_positions.size() == expect_all.size() - 2);
    for (std::size_t m = 0; m < b.interface_positions.size(); ++m)
        CHECK(b.interface_positions[m] == expect_all[m + 1]);

    // exact wells, zero elastic energy
    const auto e = total_energy(b.ms);
    CHECK(e.elastic <= 1e-12);
    CHECK(e.interfacial > 0.0);

    std::mt19937_64 rng(31);
    CHECK(max_jump(b.ms.u, d, rng, 4000, 1e-9) <= 1e-12 * d.diameter());

    // theta alternates between (1/3, 2/3) and (2/3, 1/3) across the trace
    const Vec3 tdir = d.frame().row(0);
    const double mid_interval = 0.5 * (b.segments[0].lo + b.segments[0].hi);
    const double mid_gap = 0.5 * (b.segments[1].lo + b.segments[1].hi);
    CHECK(b.theta(mid_interval * tdir)[1] == doctest::Approx(1.0 / 3.0));
    CHECK(b.theta(mid_gap * tdir)[1] == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("per-gap energy ratio approaches 2^{2/3} as eta decreases") {
    const double c = 0.3;
    const double d_gap = 0.2;
    for (double eta : {1e-6, 1e-8, 1e-10}) {
        const double ratio =
            cluster_segment_energy(d_gap, eta, c) / cluster_segment_energy(0.5 * d_gap, eta, c);
        const double err = std::abs(ratio - std::pow(2.0, 2.0 / 3.0));
        if (eta <= 1e-8) CHECK(err < 0.05 * std::pow(2.0, 2.0 / 3.0));
    }
}

TEST_CASE("grid per-segment interfacial energy matches the closed form") {
    ClusterSpec spec;
    spec.epsilon = 1.0 / 3.0;
    spec.generations = 1;
    spec.period_coupling = 0.3;
    const BoxDomain d = make_cluster_domain(spec, 2048, 16);
    const double eta = 1e-5;
    const auto b = clustering_laminate(spec, d, eta);
    const auto inter = interfacial_energy(b.ms);

    // middle gap between the two interfaces
    const auto& seg = b.segments[1];
    const auto& n = d.resolution();
    const Vec3 sp = d.spacing();
    double gap_energy = 0.0;
    for (int i = 0; i < n[0]; ++i) {
        const double t = (i + 0.5) * sp[0];
        if (t < seg.lo + 2 * sp[0] || t > seg.hi - 2 * sp[0]) continue;
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k)
                gap_energy += inter.second.at(i, j, k);
    }
    gap_energy *= d.cell_volume();
    const double area = d.extent()[1] * d.extent()[2];
    const double oracle = cluster_segment_energy(seg.hi - seg.lo, eta, spec.period_coupling) * area;
    CHECK(gap_energy == doctest::Approx(oracle).epsilon(0.05));
}

TEST_CASE("clustering rejects sub-cell structure") {
    ClusterSpec spec;
    spec.epsilon = 1.0 / 3.0;
    spec.generations = 6;  // 1/8^6 is far below any reasonable grid
    const BoxDomain d = make_cluster_domain(spec, 256, 16);
    CHECK_THROWS(clustering_laminate(spec, d, 1e-4));
}

TEST_CASE("conjugate-class mode alternates oscillation directions") {
    ClusterSpec spec;
    spec.epsilon = 1.0 / 3.0;
    spec.generations = 1;
    spec.period_coupling = 0.5;
    spec.conjugate_classes = true;
    const BoxDomain d = make_cluster_domain(spec, 512, 512);
    const auto b = clustering_laminate(spec, d, 1e-4);

    // interval segments oscillate along the conjugate axis, gaps along the
    // transversal axis
    const Vec3 tdir = d.frame().row(0);
    const Vec3 odir = d.frame().row(1);
    const auto& seg_int = b.segments[0];
    const auto& seg_gap = b.segments[1];
    const double t_int = 0.5 * (seg_int.lo + seg_int.hi);
    const double t_gap = 0.5 * (seg_gap.lo + seg_gap.hi);
    auto phase = b.ms.phase_sampler;
    // moving along odir by half the fine period flips the phase inside
    // intervals but never inside gaps
    bool changes_int = false, changes_gap = false;
    for (int m = 0; m < 50; ++m) {
        const Vec3 base_int = t_int * tdir + (0.2 + 0.011 * m) * odir;
        const Vec3 base_gap = t_gap * tdir + (0.2 + 0.011 * m) * odir;
        if (phase(base_int) != phase(base_int + 0.5 * seg_int.period * odir))
            changes_int = true;
        if (phase(base_gap) != phase(base_gap + 0.5 * seg_int.period * odir))
            changes_gap = true;
    }
    CHECK(changes_int);
    CHECK_FALSE(changes_gap);

    // the elastic cost is confined to the taper bands near segment boundaries
    const auto e = total_energy(b.ms);
    CHECK(e.elastic > 0.0);
    const auto& n = d.resolution();
    const Vec3 sp = d.spacing();
    double interior_elastic = 0.0;
    for (int i = 0; i < n[0]; ++i) {
        const double t = (i + 0.5) * sp[0];
        bool near = false;
        for (const auto& seg : b.segments)
            if (std::min(std::abs(t - seg.lo), std::abs(t - seg.hi)) < 1.5 * seg.period)
                near = true;
        if (near) continue;
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k)
                interior_elastic += e.elastic_density.at(i, j, k);
    }
    interior_elastic *= d.cell_volume();
    CHECK(interior_elastic < 1e-10 * e.elastic);
}

// ---------------------------------------------------------------------------
// eta sequences
// ---------------------------------------------------------------------------

TEST_CASE("laminate eta sequence halves eta and couples the period to eta^{1/3}") {
    LaminateSpec spec;
    spec.fraction = 1.0 / 3.0;
    spec.period = 0.25;
    const BoxDomain d = laminate_box(spec, 32);
    const auto seq = laminate_eta_sequence(spec, d, 1e-3, 4);
    REQUIRE(seq.members.size() == 4);
    for (std::size_t m = 0; m + 1 < seq.members.size(); ++m)
        CHECK(seq.members[m + 1].eta == doctest::Approx(0.5 * seq.members[m].eta));
    // interfacial energy stays bounded along the sequence (period coupling)
    const double i0 = interfacial_energy(seq.members.front()).first;
    const double i3 = interfacial_energy(seq.members.back()).first;
    CHECK(i3 < 1.3 * i0);
    CHECK_THROWS(laminate_eta_sequence(spec, d, 1e-3, 2));
}
