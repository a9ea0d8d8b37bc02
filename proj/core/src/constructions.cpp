#include "twinlab/constructions.hpp"

#include <algorithm>
#include <cmath>

namespace twinlab {

namespace {

Microstructure make_microstructure(const BoxDomain& domain,
                                   DisplacementField::Sampler u,
                                   DisplacementField::GradientSampler grad_u,
                                   std::function<int(const Vec3&)> phase, double eta) {
    DisplacementField uf(domain, std::move(u), std::move(grad_u));
    PartitionField chi = PartitionField::from_function(domain, phase);
    Microstructure ms(std::move(uf), std::move(chi), eta);
    ms.phase_sampler = std::move(phase);
    return ms;
}

// Gradient jump vector across an interface with the given normal: the strain
// difference e_j - e_i equals sym(a (x) normal).
Vec3 interface_jump_vector(int i, int j, const TwinNormal& normal) {
    const auto d = rank_one_decompose(PhaseIndex(i), PhaseIndex(j));
    if (normal.same_class(d.nu_plus)) return d.scale * d.nu_minus.components;
    if (normal.same_class(d.nu_minus)) return d.scale * d.nu_plus.components;
    throw std::invalid_argument("interface_jump_vector: normal does not match the variant pair");
}

// Measure of the complement phase {frac((s-o)/p) >= f} accumulated over [0, s].
double complement_measure(double s, double offset, double period, double fraction) {
    auto phi = [&](double t) {
        const double v = (t - offset) / period;
        const double fl = std::floor(v);
        const double w = (v - fl) * period;
        return (1.0 - fraction) * period * fl + std::max(0.0, w - fraction * period);
    };
    return phi(s) - phi(0.0);
}

}  // namespace

// ---------------------------------------------------------------------------
// simple laminate
// ---------------------------------------------------------------------------

Mat3 laminate_frame(const TwinNormal& normal) {
    const Vec3 n = normal.components;
    const Vec3 c = normal.conjugate().components;
    Mat3 f;
    f.row(0) = n;
    f.row(1) = c;
    f.row(2) = n.cross(c);
    return f;
}

LaminateBuild simple_laminate(const LaminateSpec& spec, const BoxDomain& domain, double eta) {
    if (spec.variant_i == spec.variant_j)
        throw std::invalid_argument("simple_laminate: variants must differ");
    if (spec.fraction <= 0.0 || spec.fraction >= 1.0)
        throw std::invalid_argument("simple_laminate: fraction must lie in (0,1)");
    const int pair = 6 - spec.variant_i - spec.variant_j;
    if (spec.normal.pair_index != pair)
        throw std::invalid_argument("simple_laminate: normal must belong to the conjugate pair");

    bool aligned = false;
    for (int a = 0; a < 3; ++a)
        if (spec.normal.same_class(Vec3(domain.frame().row(a)), 1e-10)) aligned = true;
    if (!aligned)
        throw std::invalid_argument("simple_laminate: domain frame must align the normal with a grid axis");

    const Vec3 nu = spec.normal.components;
    const Vec3 a = interface_jump_vector(spec.variant_i, spec.variant_j, spec.normal);
    const Mat3 ei = well_strain(PhaseIndex(spec.variant_i)).to_matrix();
    const double f = spec.fraction;
    const double p = spec.period;
    // Center a variant-i slab at s = offset.
    const double o = spec.offset - 0.5 * f * p;

    const int vi = spec.variant_i, vj = spec.variant_j;
    auto is_i = [=](double s) {
        double t = (s - o) / p;
        t -= std::floor(t);
        return t < f;
    };

    auto phase = [=](const Vec3& x) { return is_i(x.dot(nu)) ? vi : vj; };
    auto u = [=](const Vec3& x) -> Vec3 {
        return ei * x + complement_measure(x.dot(nu), o, p, f) * a;
    };
    auto grad = [=](const Vec3& x) -> Mat3 {
        Mat3 g = ei;
        if (!is_i(x.dot(nu))) g += a * nu.transpose();
        return g;
    };

    Mat3 limit = ei + (1.0 - f) * a * nu.transpose();
    Vec4 th = Vec4::Zero();
    th[vi] = f;
    th[vj] = 1.0 - f;

    LaminateBuild out{make_microstructure(domain, u, grad, phase, eta),
                      [limit](const Vec3&) { return limit; },
                      [th](const Vec3&) { return th; },
                      a};
    return out;
}

// ---------------------------------------------------------------------------
// checkerboard
// ---------------------------------------------------------------------------

CheckerboardBuild checkerboard(const CheckerboardSpec& spec, const BoxDomain& domain) {
    if (spec.a < 0.0 || spec.b < 0.0 || std::abs(spec.a + spec.b - 1.0) > 1e-12)
        throw std::invalid_argument("checkerboard: needs a, b >= 0 with a + b = 1");
    const PhaseIndex i(spec.variant_i);
    if (i.is_austenite()) throw std::invalid_argument("checkerboard: variant index required");
    if (spec.nu_next.pair_index != i.next().value() ||
        spec.nu_prev.pair_index != i.prev().value())
        throw std::invalid_argument("checkerboard: normals must come from N_{i+1} and N_{i-1}");

    const Vec3 nn = spec.nu_next.components;
    const Vec3 np = spec.nu_prev.components;
    const double a = spec.a, b = spec.b;
    const auto A = spec.set_A;
    const auto B = spec.set_B;
    const int ii = i.value(), in = i.next().value(), ip = i.prev().value();

    auto theta_fn = [=](const Vec3& x) -> Vec4 {
        const double ca = A(x.dot(nn)) ? 1.0 : 0.0;
        const double cb = B(x.dot(np)) ? 1.0 : 0.0;
        Vec4 th = Vec4::Zero();
        th[ii] = 1.0 - a * ca - b * cb;
        th[in] = b * cb;
        th[ip] = a * ca;
        return th;
    };

    CheckerboardBuild out{
        {ScalarField(domain), ScalarField(domain), ScalarField(domain), ScalarField(domain)},
        {ScalarField(domain), ScalarField(domain), ScalarField(domain), ScalarField(domain)},
        theta_fn};

    const auto& n = domain.resolution();
    for (int ci = 0; ci < n[0]; ++ci)
        for (int cj = 0; cj < n[1]; ++cj)
            for (int ck = 0; ck < n[2]; ++ck) {
                const Vec3 x = domain.cell_center(ci, cj, ck);
                const bool ca = A(x.dot(nn));
                const bool cb = B(x.dot(np));
                const Vec4 th = theta_fn(x);
                for (int m = 0; m < 4; ++m) out.theta[m].at(ci, cj, ck) = th[m];
                out.regions[0].at(ci, cj, ck) = (ca && cb) ? 1.0 : 0.0;
                out.regions[1].at(ci, cj, ck) = (!ca && cb) ? 1.0 : 0.0;
                out.regions[2].at(ci, cj, ck) = (ca && !cb) ? 1.0 : 0.0;
                out.regions[3].at(ci, cj, ck) = (!ca && !cb) ? 1.0 : 0.0;
            }
    return out;
}

// ---------------------------------------------------------------------------
// branched habit plane
// ---------------------------------------------------------------------------

namespace {

// Local band pattern of one refinement generation. Minority bands sit at
// |sigma| in [b, a) around the period centers (m + 1/2) p with
// b = t p/6, a = (1+t) p/6; t in [0,1] morphs one band into its two children.
struct BandState {
    bool minority = false;  // variant 1
    double Z = 0.0;         // antiderivative of (1/3 - chi_1) over the period
    double Zslope = 0.0;    // dZ/dtau, in {1/3, -2/3}
    double dZdt = 0.0;      // sensitivity to the morph parameter
};

BandState evaluate_band(double tau, double p, double t) {
    const double v = tau / p;
    const double fr = v - std::floor(v);
    const double sig = (fr - 0.5) * p;  // in [-p/2, p/2)
    const double b = t * p / 6.0;
    const double aa = (1.0 + t) * p / 6.0;

    BandState st;
    const double as = std::abs(sig);
    st.minority = (as >= b && as < aa);
    st.Zslope = st.minority ? -2.0 / 3.0 : 1.0 / 3.0;

    const double z1 = (0.5 * p - aa) / 3.0;              // Z(-a)
    const double z2 = z1 - 2.0 * (aa - b) / 3.0;         // Z(-b)
    const double z3 = z2 + 2.0 * b / 3.0;                // Z(+b)
    if (sig < -aa) {
        st.Z = (sig + 0.5 * p) / 3.0;
        st.dZdt = 0.0;
    } else if (sig < -b) {
        st.Z = z1 - 2.0 / 3.0 * (sig + aa);
        st.dZdt = -p / 6.0;
    } else if (sig < b) {
        st.Z = z2 + (sig + b) / 3.0;
        st.dZdt = 0.0;
    } else if (sig < aa) {
        st.Z = z3 - 2.0 / 3.0 * (sig - b);
        st.dZdt = p / 6.0;
    } else {
        st.Z = (z3 - 2.0 * (aa - b) / 3.0) + (sig - aa) / 3.0;
        st.dZdt = 0.0;
    }
    return st;
}

struct TreeGeometry {
    Vec3 nu1, nu3, a1, n3c, q;
    int depth = 0;
    double p0 = 0.0, rho_p = 0.5, rho_H = 0.5, S = 0.0, sN = 0.0;
    std::vector<double> s_top;  // s_top[l] = S rho_H^l, l = 0..depth

    // period, morph parameter and morph rate at distance s > 0 from the plane
    void locate(double s, double& p, double& t, double& dtds) const {
        if (s >= s_top[0]) {
            p = p0;
            t = 0.0;
            dtds = 0.0;
            return;
        }
        if (s < sN) {
            p = p0 * std::pow(rho_p, depth);
            t = 0.0;
            dtds = 0.0;
            return;
        }
        int l = 0;
        while (l + 1 < depth && s < s_top[l + 1]) ++l;
        const double H = s_top[l] - s_top[l + 1];
        p = p0 * std::pow(rho_p, l);
        t = (s_top[l] - s) / H;
        dtds = -1.0 / H;
    }
};

TreeGeometry make_tree_geometry(const BranchTreeSpec& spec) {
    if (spec.depth < 1) throw std::invalid_argument("branched_habit_plane: depth >= 1");
    if (spec.period_ratio <= 0.0 || spec.period_ratio >= 1.0 ||
        spec.layer_thickness_ratio <= 0.0 || spec.layer_thickness_ratio >= 1.0)
        throw std::invalid_argument("branched_habit_plane: ratios must lie in (0,1)");
    if (spec.twin_normal.pair_index != 3 || spec.habit_normal.pair_index != 1)
        throw std::invalid_argument("branched_habit_plane: twin normal in N_3, habit normal in N_1");
    if (spec.tower_height <= 0.0 || spec.tower_height > 1.0)
        throw std::invalid_argument("branched_habit_plane: tower must fit inside the unit slab");

    TreeGeometry g;
    g.nu1 = spec.habit_normal.components;
    g.nu3 = spec.twin_normal.components;
    g.a1 = -2.0 * spec.habit_normal.conjugate().components;
    g.n3c = spec.twin_normal.conjugate().components;
    const double c = g.nu1.dot(g.nu3);
    g.q = (g.nu1 - c * g.nu3).normalized();
    g.depth = spec.depth;
    g.p0 = spec.base_period;
    g.rho_p = spec.period_ratio;
    g.rho_H = spec.layer_thickness_ratio;
    g.S = spec.tower_height;
    g.s_top.resize(spec.depth + 1);
    for (int l = 0; l <= spec.depth; ++l) g.s_top[l] = g.S * std::pow(g.rho_H, l);
    g.sN = g.s_top[spec.depth];
    return g;
}

}  // namespace

BoxDomain make_branch_domain(const BranchTreeSpec& spec, int n0, int n1, double width,
                             double austenite_margin, double top_margin) {
    const TreeGeometry g = make_tree_geometry(spec);
    const double c = g.nu1.dot(g.nu3);           // +/- 1/2
    const double qc = g.q.dot(g.nu1);            // sqrt(3)/2
    const double s_lo = -austenite_margin - std::max(c, 0.0) * width +
                        std::min(c, 0.0) * 0.0;  // lower bound of s at every tau
    const double span = spec.tower_height + top_margin - s_lo + std::max(-c, 0.0) * width;
    const double extent1 = span / qc;
    const Vec3 origin = (s_lo / qc) * g.q;

    Mat3 frame;
    frame.row(0) = g.nu3;
    frame.row(1) = g.q;
    frame.row(2) = g.nu3.cross(g.q);

    const double h0 = width / n0;
    return BoxDomain(origin, Vec3(width, extent1, 2.0 * h0), {n0, n1, 2}, frame);
}

std::vector<BranchLayer> branch_layer_energies(double base_period, double period_ratio,
                                               const std::function<double(int)>& thickness_of,
                                               double eta, int depth) {
    std::vector<BranchLayer> layers(depth);
    const double we = std::pow(eta, -2.0 / 3.0);
    const double wi = std::pow(eta, 1.0 / 3.0);
    for (int l = 0; l < depth; ++l) {
        const double p = base_period * std::pow(period_ratio, l);
        const double H = thickness_of(l);
        layers[l].period = p;
        layers[l].thickness = H;
        layers[l].elastic = we * (22.5 / 108.0) * p * p / H;
        layers[l].interfacial = wi * 8.0 * H / p;
    }
    return layers;
}

double equipartition_thickness(double period, double eta) {
    // (22.5/108) eta^{-2/3} p^2 / H = 8 eta^{1/3} H / p
    return std::sqrt(22.5 / (108.0 * 8.0)) * std::pow(eta, -0.5) * std::pow(period, 1.5);
}

double suggested_eta(const BranchTreeSpec& spec) {
    double A = 0.0, B = 0.0;
    for (int l = 0; l < spec.depth; ++l) {
        const double p = spec.base_period * std::pow(spec.period_ratio, l);
        const double H = spec.tower_height * (1.0 - spec.layer_thickness_ratio) *
                         std::pow(spec.layer_thickness_ratio, l);
        A += (22.5 / 108.0) * p * p / H;
        B += 8.0 * H / p;
    }
    return A / B;
}

BranchTreeBuild branched_habit_plane(const BranchTreeSpec& spec, const BoxDomain& domain,
                                     double eta) {
    const TreeGeometry g = make_tree_geometry(spec);

    // finest twin period must stay resolvable along the twin axis
    const double p_finest = g.p0 * std::pow(g.rho_p, g.depth);
    double spacing_tau = domain.extent()[0] / domain.resolution()[0];
    for (int a = 0; a < 3; ++a)
        if (spec.twin_normal.same_class(Vec3(domain.frame().row(a)), 1e-10))
            spacing_tau = domain.spacing()[a];
    if (p_finest < 4.0 * spacing_tau)
        throw std::invalid_argument("branched_habit_plane: depth too large for resolution (period under 4 cells)");

    const Mat3 ebar = (well_strain(PhaseIndex(1)).to_matrix() +
                       2.0 * well_strain(PhaseIndex(2)).to_matrix()) / 3.0;
    (void)ebar;

    const Vec3 nu1 = g.nu1, nu3 = g.nu3, a1 = g.a1, n3c = g.n3c;
    const double sN = g.sN;
    const TreeGeometry geom = g;

    auto state_at = [geom](const Vec3& x, double& s, BandState& st, double& dtds,
                           double& taper, double& taper_rate) {
        s = x.dot(geom.nu1);
        if (s <= 0.0) return false;
        double p, t;
        geom.locate(s, p, t, dtds);
        st = evaluate_band(x.dot(geom.nu3), p, t);
        if (s < geom.sN) {
            taper = s / geom.sN;
            taper_rate = 1.0 / geom.sN;
        } else {
            taper = 1.0;
            taper_rate = 0.0;
        }
        return true;
    };

    auto phase = [state_at](const Vec3& x) -> int {
        double s, dtds, taper, taper_rate;
        BandState st;
        if (!state_at(x, s, st, dtds, taper, taper_rate)) return 0;
        return st.minority ? 1 : 2;
    };

    auto u = [state_at, a1, n3c](const Vec3& x) -> Vec3 {
        double s, dtds, taper, taper_rate;
        BandState st;
        if (!state_at(x, s, st, dtds, taper, taper_rate)) return Vec3::Zero();
        return s * a1 + 6.0 * taper * st.Z * n3c;
    };

    auto grad = [state_at, a1, n3c, nu1, nu3](const Vec3& x) -> Mat3 {
        double s, dtds, taper, taper_rate;
        BandState st;
        if (!state_at(x, s, st, dtds, taper, taper_rate)) return Mat3::Zero();
        Mat3 gm = a1 * nu1.transpose();
        gm += 6.0 * taper * st.Zslope * n3c * nu3.transpose();
        gm += 6.0 * (taper_rate * st.Z + taper * st.dZdt * dtds) * n3c * nu1.transpose();
        return gm;
    };

    Mat3 limit_twin = a1 * nu1.transpose();
    auto limit_gradient = [limit_twin, nu1](const Vec3& x) -> Mat3 {
        return (x.dot(nu1) > 0.0) ? limit_twin : Mat3::Zero();
    };
    auto theta = [nu1](const Vec3& x) -> Vec4 {
        if (x.dot(nu1) <= 0.0) return Vec4(1.0, 0.0, 0.0, 0.0);
        return Vec4(0.0, 1.0 / 3.0, 2.0 / 3.0, 0.0);
    };

    auto thickness_of = [&](int l) {
        return g.s_top[static_cast<std::size_t>(l)] - g.s_top[static_cast<std::size_t>(l) + 1];
    };
    auto layers = branch_layer_energies(g.p0, g.rho_p, thickness_of, eta, g.depth);
    for (int l = 0; l < g.depth; ++l) layers[static_cast<std::size_t>(l)].s_top = g.s_top[static_cast<std::size_t>(l)];

    BranchTreeBuild out{make_microstructure(domain, u, grad, phase, eta),
                       limit_gradient,
                       theta,
                       std::move(layers),
                       nu1,
                       nu3,
                       g.q,
                       sN};
    return out;
}

// ---------------------------------------------------------------------------
// interface clustering
// ---------------------------------------------------------------------------

std::vector<double> cantor_endpoints(double ratio, int generations, double lo, double hi) {
    if (ratio <= 0.0 || ratio >= 0.5)
        throw std::invalid_argument("cantor_endpoints: ratio must lie in (0, 1/2)");
    std::vector<std::pair<double, double>> intervals{{0.0, 1.0}};
    for (int gidx = 0; gidx < generations; ++gidx) {
        std::vector<std::pair<double, double>> next;
        next.reserve(2 * intervals.size());
        for (auto [a, b] : intervals) {
            const double len = b - a;
            next.emplace_back(a, a + ratio * len);
            next.emplace_back(b - ratio * len, b);
        }
        intervals = std::move(next);
    }
    std::vector<double> pts;
    pts.reserve(2 * intervals.size());
    for (auto [a, b] : intervals) {
        pts.push_back(lo + a * (hi - lo));
        pts.push_back(lo + b * (hi - lo));
    }
    return pts;
}

BoxDomain make_cluster_domain(const ClusterSpec& spec, int n0, int n1, double length) {
    const TwinNormal* match = nullptr;
    for (const auto& nu : all_twin_normals())
        if (nu.same_class(spec.transversal_direction, 1e-10)) match = &nu;
    if (!match)
        throw std::invalid_argument("make_cluster_domain: transversal direction must be a twin normal");
    Mat3 frame;
    frame.row(0) = match->components;
    frame.row(1) = match->conjugate().components;
    frame.row(2) = match->components.cross(match->conjugate().components);
    const double h0 = length / n0;
    return BoxDomain(Vec3::Zero(), Vec3(length, length * n1 / n0, 2.0 * h0), {n0, n1, 2}, frame);
}

double cluster_segment_energy(double d, double eta, double coupling) {
    const double p_target = coupling * std::cbrt(eta) * std::cbrt(d);
    const int n_per = std::max(1, static_cast<int>(std::lround(d / p_target)));
    return std::cbrt(eta) * 2.0 * (2.0 * n_per - 1.0);
}

ClusterBuild clustering_laminate(const ClusterSpec& spec, const BoxDomain& domain, double eta) {
    if (spec.epsilon <= 0.0 || spec.epsilon >= 2.0 / 3.0)
        throw std::invalid_argument("clustering_laminate: epsilon must lie in (0, 2/3)");
    if (spec.generations < 1)
        throw std::invalid_argument("clustering_laminate: generations >= 1");

    const TwinNormal* tnormal = nullptr;
    for (const auto& nu : all_twin_normals())
        if (nu.same_class(spec.transversal_direction, 1e-10)) tnormal = &nu;
    if (!tnormal)
        throw std::invalid_argument("clustering_laminate: transversal direction must be a twin normal");

    // The pair N_k twins the two variants other than k.
    const int k = tnormal->pair_index;
    const int vi = (k % 3) + 1;
    const int vj = (vi % 3) + 1;

    const Vec3 tdir = tnormal->components;
    const Vec3 odir = tnormal->conjugate().components;
    const Vec3 a_par = interface_jump_vector(vi, vj, *tnormal);
    const Vec3 a_orth = interface_jump_vector(vi, vj, tnormal->conjugate());

    // Transversal range of the domain (grid axis aligned with tdir).
    int taxis = -1;
    for (int a = 0; a < 3; ++a)
        if (tnormal->same_class(Vec3(domain.frame().row(a)), 1e-10)) taxis = a;
    if (taxis < 0)
        throw std::invalid_argument("clustering_laminate: domain frame must align the transversal direction");
    const double t_origin = domain.origin().dot(tdir);
    const double t_len = domain.extent()[taxis];
    const double spacing_t = domain.spacing()[taxis];

    const double margin = 0.05 * t_len;
    const double lambda = spec.cantor_ratio();
    const auto all_endpoints = cantor_endpoints(lambda, spec.generations, t_origin + margin,
                                                t_origin + t_len - margin);
    // Large-scale interfaces are the interior endpoints; the outer carrier
    // edges merge with the margin slabs (generation 1 has two interfaces).
    std::vector<double> endpoints(all_endpoints.begin() + 1, all_endpoints.end() - 1);

    std::vector<ClusterSegment> segments;
    {
        std::vector<double> cuts;
        cuts.push_back(t_origin);
        cuts.insert(cuts.end(), endpoints.begin(), endpoints.end());
        cuts.push_back(t_origin + t_len);
        for (std::size_t m = 0; m + 1 < cuts.size(); ++m) {
            ClusterSegment seg;
            seg.lo = cuts[m];
            seg.hi = cuts[m + 1];
            // interval, gap, interval, ... starting and ending on intervals
            seg.cantor_interval = (m % 2 == 0);
            segments.push_back(seg);
        }
    }

    const double eta3 = std::cbrt(eta);
    for (auto& seg : segments) {
        const double d = seg.hi - seg.lo;
        if (d < 2.0 * spacing_t)
            throw std::invalid_argument("clustering_laminate: generations produce sub-cell gaps");
        const double p_target = spec.period_coupling * eta3 * std::cbrt(d);
        const int n_per = std::max(1, static_cast<int>(std::lround(d / p_target)));
        seg.period = d / n_per;
        if (seg.period < 4.0 * spacing_t)
            throw std::invalid_argument("clustering_laminate: fine period under 4 cells");
        if (spec.conjugate_classes) {
            seg.fraction = 0.5;
            seg.normal_sign = seg.cantor_interval ? +1 : -1;  // +1: conjugate-class twin
        } else {
            seg.fraction = seg.cantor_interval ? 1.0 / 3.0 : 2.0 / 3.0;
            seg.normal_sign = -1;  // all segments oscillate along the transversal axis
        }
    }

    // Prefix values of the shear accumulation at segment starts (default mode).
    std::vector<double> gamma0(segments.size() + 1, 0.0);
    for (std::size_t m = 0; m < segments.size(); ++m) {
        const auto& seg = segments[m];
        gamma0[m + 1] = gamma0[m] +
                        complement_measure(seg.hi - seg.lo, 0.0, seg.period, seg.fraction);
    }

    auto segment_of = [segments](double t) -> std::size_t {
        std::size_t lo = 0, hi = segments.size() - 1;
        while (lo < hi) {
            const std::size_t mid = (lo + hi + 1) / 2;
            if (t >= segments[mid].lo) lo = mid;
            else hi = mid - 1;
        }
        return lo;
    };

    const Mat3 ei = well_strain(PhaseIndex(vi)).to_matrix();
    const Mat3 ej = well_strain(PhaseIndex(vj)).to_matrix();
    const Mat3 ebar = 0.5 * (ei + ej);

    std::function<int(const Vec3&)> phase;
    DisplacementField::Sampler usamp;
    DisplacementField::GradientSampler gsamp;
    std::function<Mat3(const Vec3&)> limit_gradient;
    std::function<Vec4(const Vec3&)> theta;

    if (!spec.conjugate_classes) {
        phase = [=](const Vec3& x) -> int {
            const double t = x.dot(tdir);
            const auto& seg = segments[segment_of(t)];
            double w = (t - seg.lo) / seg.period;
            w -= std::floor(w);
            return (w < seg.fraction) ? vi : vj;
        };
        usamp = [=](const Vec3& x) -> Vec3 {
            const double t = x.dot(tdir);
            const std::size_t m = segment_of(t);
            const auto& seg = segments[m];
            const double gamma =
                gamma0[m] + complement_measure(t - seg.lo, 0.0, seg.period, seg.fraction);
            return ei * x + gamma * a_par;
        };
        gsamp = [=](const Vec3& x) -> Mat3 {
            Mat3 gm = ei;
            if (phase(x) == vj) gm += a_par * tdir.transpose();
            return gm;
        };
        limit_gradient = [=](const Vec3& x) -> Mat3 {
            const auto& seg = segments[segment_of(x.dot(tdir))];
            return ei + (1.0 - seg.fraction) * a_par * tdir.transpose();
        };
    } else {
        // Segments alternate the oscillation direction between the two members
        // of the twin pair; orthogonal segments taper their shear near the
        // segment boundaries to stay continuous.
        phase = [=](const Vec3& x) -> int {
            const double t = x.dot(tdir);
            const auto& seg = segments[segment_of(t)];
            const double c = (seg.normal_sign > 0) ? x.dot(odir) : (t - seg.lo);
            double w = c / seg.period;
            w -= std::floor(w);
            return (w < seg.fraction) ? vi : vj;
        };
        usamp = [=](const Vec3& x) -> Vec3 {
            const double t = x.dot(tdir);
            const auto& seg = segments[segment_of(t)];
            if (seg.normal_sign < 0) {
                // mean-zero shear accumulation; vanishes at both segment ends
                const double zeta =
                    complement_measure(t - seg.lo, 0.0, seg.period, seg.fraction) -
                    (1.0 - seg.fraction) * (t - seg.lo);
                return ebar * x + zeta * a_par;
            }
            const double w = std::min(t - seg.lo, seg.hi - t);
            const double taper = std::clamp(w / seg.period, 0.0, 1.0);
            const double zeta =
                complement_measure(x.dot(odir), 0.0, seg.period, seg.fraction) -
                0.5 * x.dot(odir);
            return ebar * x + taper * zeta * a_orth;
        };
        gsamp = [=](const Vec3& x) -> Mat3 {
            const double t = x.dot(tdir);
            const auto& seg = segments[segment_of(t)];
            Mat3 gm = ebar;
            if (seg.normal_sign < 0) {
                const double zp = (phase(x) == vj ? 1.0 : 0.0) - 0.5;
                gm += zp * a_par * tdir.transpose();
                return gm;
            }
            const double wlo = t - seg.lo, whi = seg.hi - t;
            const double w = std::min(wlo, whi);
            const double taper = std::clamp(w / seg.period, 0.0, 1.0);
            double taper_rate = 0.0;
            if (w < seg.period) taper_rate = (wlo < whi ? 1.0 : -1.0) / seg.period;
            const double zp = (phase(x) == vj ? 1.0 : 0.0) - 0.5;
            const double zeta =
                complement_measure(x.dot(odir), 0.0, seg.period, seg.fraction) -
                0.5 * x.dot(odir);
            gm += taper * zp * a_orth * odir.transpose();
            gm += taper_rate * zeta * a_orth * tdir.transpose();
            return gm;
        };
        limit_gradient = [=](const Vec3&) -> Mat3 { return ebar; };
    }

    theta = [=](const Vec3& x) -> Vec4 {
        const auto& seg = segments[segment_of(x.dot(tdir))];
        Vec4 th = Vec4::Zero();
        th[vi] = seg.fraction;
        th[vj] = 1.0 - seg.fraction;
        return th;
    };

    Microstructure ms = make_microstructure(domain, usamp, gsamp, phase, eta);

    ScalarField coarse(domain);
    {
        const auto& n = domain.resolution();
        for (int ci = 0; ci < n[0]; ++ci)
            for (int cj = 0; cj < n[1]; ++cj)
                for (int ck = 0; ck < n[2]; ++ck) {
                    const double t = domain.cell_center(ci, cj, ck).dot(tdir);
                    coarse.at(ci, cj, ck) =
                        segments[segment_of(t)].cantor_interval ? 1.0 : 0.0;
                }
    }

    ClusterBuild out{std::move(ms),    limit_gradient, theta, std::move(endpoints),
                     std::move(segments), std::move(coarse)};
    return out;
}

// ---------------------------------------------------------------------------
// eta sequences
// ---------------------------------------------------------------------------

EtaSequence laminate_eta_sequence(const LaminateSpec& spec, const BoxDomain& domain,
                                  double eta0, int count) {
    if (count < 3) throw std::invalid_argument("laminate_eta_sequence: needs >= 3 members");
    EtaSequence seq;
    for (int m = 0; m < count; ++m) {
        const double eta = eta0 * std::pow(2.0, -m);
        LaminateSpec s = spec;
        s.period = spec.period * std::cbrt(eta / eta0);
        auto b = simple_laminate(s, domain, eta);
        if (m == 0) {
            seq.limit_gradient = b.limit_gradient;
            seq.theta = b.theta;
        }
        seq.members.push_back(std::move(b.ms));
    }
    return seq;
}

EtaSequence branch_eta_sequence(const BranchTreeSpec& spec, const BoxDomain& domain,
                                double eta0, int count) {
    if (count < 3) throw std::invalid_argument("branch_eta_sequence: needs >= 3 members");
    EtaSequence seq;
    for (int m = 0; m < count; ++m) {
        const double eta = eta0 * std::pow(2.0, -m);
        BranchTreeSpec s = spec;
        s.base_period = spec.base_period * std::cbrt(eta / eta0);
        auto b = branched_habit_plane(s, domain, eta);
        if (m == 0) {
            seq.limit_gradient = b.limit_gradient;
            seq.theta = b.theta;
        }
        seq.members.push_back(std::move(b.ms));
    }
    return seq;
}

}  // namespace twinlab
