#include "twinlab/besov.hpp"

#include <algorithm>
#include <cmath>

namespace twinlab {

double SubBox::boundary_distance(const BoxDomain& d) const {
    double m = std::numeric_limits<double>::max();
    for (int a = 0; a < 3; ++a) {
        m = std::min(m, lo[a]);
        m = std::min(m, d.extent()[a] - hi[a]);
    }
    return m;
}

SubBox SubBox::inflated(double r, const BoxDomain& d) const {
    SubBox out;
    for (int a = 0; a < 3; ++a) {
        out.lo[a] = std::max(0.0, lo[a] - r);
        out.hi[a] = std::min(d.extent()[a], hi[a] + r);
    }
    return out;
}

DirectionDesign default_direction_design(const BoxDomain& domain) {
    DirectionDesign design;
    for (const auto& nu : all_twin_normals()) design.directions.push_back(nu.components);
    for (int a = 0; a < 3; ++a) design.directions.push_back(domain.frame().row(a));
    // ten quasi-uniform points: golden-angle spiral on the upper hemisphere
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int m = 0; m < 10; ++m) {
        const double z = (m + 0.5) / 10.0;
        const double r = std::sqrt(1.0 - z * z);
        const double phi = golden * m;
        design.directions.emplace_back(r * std::cos(phi), r * std::sin(phi), z);
    }
    return design;
}

double local_l1_difference(const ScalarField& chi, const SubBox& U, const Vec3& d, double h,
                           double margin_factor) {
    const BoxDomain& dom = chi.domain();
    if (U.boundary_distance(dom) < margin_factor * h)
        throw std::invalid_argument("local_l1_difference: h too large for the margin of U");

    const Vec3 dir = d.normalized();
    const auto& n = dom.resolution();
    const Vec3 sp = dom.spacing();

    // Cell index window covering U.
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor(U.lo[a] / sp[a])));
        hi[a] = std::min(n[a] - 1, static_cast<int>(std::ceil(U.hi[a] / sp[a])));
    }

    double sum = 0.0;
    for (int i = lo[0]; i <= hi[0]; ++i)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int k = lo[2]; k <= hi[2]; ++k) {
                const Vec3 g = dom.grid_point(i, j, k);
                if (!U.contains_grid(g)) continue;
                const Vec3 x = dom.lab_from_grid(g);
                const Vec3 y = x + h * dir;
                if (!dom.contains_lab(y)) continue;  // zero outside the box
                sum += std::abs(chi.nearest_value(y) - chi.at(i, j, k));
            }
    return sum * dom.cell_volume();
}

std::vector<double> dyadic_h_set(const SubBox& U, const BoxDomain& domain, int k_min, int k_max,
                                 double margin_factor) {
    const double diam = U.diameter();
    const double margin = U.boundary_distance(domain);
    std::vector<double> hs;
    for (int k = k_min; k <= k_max; ++k) {
        const double h = diam * std::pow(2.0, -k);
        if (margin_factor * h <= margin) hs.push_back(h);
    }
    return hs;
}

namespace {

// least-squares slope of log(y) vs log(x) over positive entries
void log_log_fit(const std::vector<double>& x, const std::vector<double>& y, double& slope,
                 double& residual) {
    std::vector<double> lx, ly;
    for (std::size_t m = 0; m < x.size(); ++m)
        if (y[m] > 0.0) {
            lx.push_back(std::log(x[m]));
            ly.push_back(std::log(y[m]));
        }
    slope = 0.0;
    residual = 0.0;
    if (lx.size() < 2) return;
    const double n = static_cast<double>(lx.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t m = 0; m < lx.size(); ++m) {
        sx += lx[m];
        sy += ly[m];
        sxx += lx[m] * lx[m];
        sxy += lx[m] * ly[m];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return;
    slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    for (std::size_t m = 0; m < lx.size(); ++m) {
        const double e = ly[m] - (intercept + slope * lx[m]);
        residual += e * e;
    }
    residual = std::sqrt(residual / n);
}

}  // namespace

BesovReport besov_seminorm(const ScalarField& chi, const SubBox& U,
                           const std::vector<double>& h_set, const DirectionDesign& design,
                           double margin_factor) {
    if (h_set.empty() || design.directions.empty())
        throw std::invalid_argument("besov_seminorm: empty design");

    BesovReport rep;
    rep.h_values = h_set;
    rep.directions = design.directions;
    const std::size_t nd = design.directions.size();
    rep.l1_table.assign(nd, std::vector<double>(h_set.size(), 0.0));
    rep.normalized_table = rep.l1_table;
    rep.direction_slopes.assign(nd, 0.0);
    rep.direction_residuals.assign(nd, 0.0);

    double peak = 0.0;
    for (std::size_t di = 0; di < nd; ++di)
        for (std::size_t hi = 0; hi < h_set.size(); ++hi) {
            const double l1 =
                local_l1_difference(chi, U, design.directions[di], h_set[hi], margin_factor);
            rep.l1_table[di][hi] = l1;
            rep.normalized_table[di][hi] = l1 * std::pow(h_set[hi], -2.0 / 3.0);
            peak = std::max(peak, l1);
        }

    for (std::size_t di = 0; di < nd; ++di) {
        log_log_fit(h_set, rep.l1_table[di], rep.direction_slopes[di],
                    rep.direction_residuals[di]);
        double mx = 0.0;
        for (double v : rep.l1_table[di]) mx = std::max(mx, v);
        if (mx < 1e-9 * peak) continue;  // negligible response in this direction
        for (std::size_t hi = 0; hi < h_set.size(); ++hi) {
            if (rep.normalized_table[di][hi] > rep.seminorm) {
                rep.seminorm = rep.normalized_table[di][hi];
                rep.sup_direction = static_cast<int>(di);
            }
        }
    }
    if (rep.sup_direction >= 0) {
        rep.fitted_exponent = rep.direction_slopes[static_cast<std::size_t>(rep.sup_direction)];
        rep.fit_residual = rep.direction_residuals[static_cast<std::size_t>(rep.sup_direction)];
    }
    return rep;
}

double theorem_comparator_ratio(double l1_value, double interfacial_Uch, double elastic_Uch,
                                double parameter, double h, ComparatorMode mode) {
    if (parameter <= 0.0)
        throw std::invalid_argument("theorem_comparator_ratio: parameter must be positive");
    const double prefactor = 1.0 / parameter;  // 1/epsilon or 1/min(a,b)
    const double rhs = prefactor * std::pow(interfacial_Uch, 2.0 / 3.0) *
                       std::cbrt(elastic_Uch) * std::pow(h, 2.0 / 3.0);
    (void)mode;
    if (rhs <= 0.0) {
        if (l1_value <= 0.0) return 0.0;
        throw std::domain_error("theorem_comparator_ratio: zero energy with nonzero difference norm");
    }
    return l1_value / rhs;
}

double density_over_inflated(const ScalarField& density, const SubBox& U, double ch) {
    const BoxDomain& dom = density.domain();
    const SubBox V = U.inflated(ch, dom);
    const auto& n = dom.resolution();
    const Vec3 sp = dom.spacing();
    int lo[3], hi[3];
    for (int a = 0; a < 3; ++a) {
        lo[a] = std::max(0, static_cast<int>(std::floor(V.lo[a] / sp[a])));
        hi[a] = std::min(n[a] - 1, static_cast<int>(std::ceil(V.hi[a] / sp[a])));
    }
    double sum = 0.0;
    for (int i = lo[0]; i <= hi[0]; ++i)
        for (int j = lo[1]; j <= hi[1]; ++j)
            for (int k = lo[2]; k <= hi[2]; ++k)
                if (V.contains_grid(dom.grid_point(i, j, k))) sum += density.at(i, j, k);
    return sum * dom.cell_volume();
}

}  // namespace twinlab
