#include "twinlab/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace twinlab {

TraceSet::TraceSet(std::vector<double> pts, double length)
    : points(std::move(pts)), ambient_length(length) {
    if (length <= 0.0) throw std::invalid_argument("TraceSet: ambient length must be positive");
    std::sort(points.begin(), points.end());
    for (double p : points)
        if (p < 0.0 || p > ambient_length)
            throw std::invalid_argument("TraceSet: points must lie inside the segment");
}

std::vector<double> dyadic_scales(double len, int k_min, int k_max) {
    std::vector<double> out;
    for (int k = k_min; k <= k_max; ++k) out.push_back(len * std::pow(2.0, -k));
    return out;
}

namespace {

void fit_loglog(const std::vector<double>& x, const std::vector<double>& y, double& slope,
                double& residual) {
    const std::size_t n = x.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double lx = std::log(x[m]);
        const double ly = std::log(y[m]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double nn = static_cast<double>(n);
    slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / nn;
    residual = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
        const double e = std::log(y[m]) - (intercept + slope * std::log(x[m]));
        residual += e * e;
    }
    residual = std::sqrt(residual / nn);
}

}  // namespace

DimensionEstimate box_counting_dimension(const TraceSet& trace,
                                         const std::vector<double>& scales) {
    if (trace.points.size() < 2)
        throw std::invalid_argument("box_counting_dimension: degenerate point set");
    if (scales.size() < 5)
        throw std::invalid_argument("box_counting_dimension: needs >= 5 scales");
    const double lo = *std::min_element(scales.begin(), scales.end());
    const double hi = *std::max_element(scales.begin(), scales.end());
    if (hi / lo < 100.0)
        throw std::invalid_argument("box_counting_dimension: scales must span >= 2 decades");

    DimensionEstimate est;
    est.scales = scales;
    std::vector<double> inv_scales, counts;
    for (double eps : scales) {
        std::set<long long> occupied;
        for (double p : trace.points)
            occupied.insert(static_cast<long long>(std::floor(p / eps)));
        est.counts.push_back(occupied.size());
        inv_scales.push_back(1.0 / eps);
        counts.push_back(static_cast<double>(occupied.size()));
    }
    fit_loglog(inv_scales, counts, est.dimension, est.residual);
    return est;
}

BlowupProfile blowup_profile(const Microstructure& ms, const ScalarField& elastic_density,
                             const ScalarField& interfacial_density, const Vec3& habit_normal,
                             const Vec3& twin_normal, const Vec3& x_prime, const Vec3& d,
                             const std::vector<double>& h_values, const BlowupOptions& opts) {
    const Vec3 dir = d.normalized();
    if (dir.dot(habit_normal) <= 0.0)
        throw std::invalid_argument("blowup_profile: d must be transversal (d . nu_1 > 0)");
    if (std::abs(dir.dot(twin_normal)) > 1e-9)
        throw std::invalid_argument("blowup_profile: d must be orthogonal to the twin normal");
    if (std::abs(x_prime.dot(habit_normal)) > 1e-9)
        throw std::invalid_argument("blowup_profile: x' must lie on the habit plane");

    const BoxDomain& dom = ms.domain();
    const Vec3 sp = dom.spacing();
    const double tube = opts.tube_radius_cells * sp.minCoeff();

    // Tube-averaged density at a lab point: mean over offsets orthogonal to d
    // within the tube radius (the twin direction is the transverse direction
    // that matters; the extruded axis is constant).
    const Vec3 transverse = twin_normal.normalized();
    auto tube_average = [&](const ScalarField& rho, const Vec3& x) {
        const int half = std::max(1, static_cast<int>(std::round(tube / sp.minCoeff())));
        double sum = 0.0;
        int cnt = 0;
        for (int o = -half; o <= half; ++o) {
            const Vec3 y = x + (o * sp.minCoeff()) * transverse;
            if (!dom.contains_lab(y)) continue;
            sum += rho.nearest_value(y);
            ++cnt;
        }
        if (cnt == 0) throw std::invalid_argument("blowup_profile: tube leaves the domain");
        return sum / cnt;
    };

    BlowupProfile prof;
    prof.h_values = h_values;
    for (double h : h_values) {
        const Vec3 xh = x_prime + h * dir;
        if (!dom.contains_lab(xh))
            throw std::invalid_argument("blowup_profile: h leaves the domain");
        const double inter = tube_average(interfacial_density, xh);
        double el = 0.0;
        for (int q = 0; q < opts.elastic_samples; ++q) {
            const double s = (q + 0.5) / opts.elastic_samples * h;
            el += tube_average(elastic_density, x_prime + s * dir);
        }
        el /= opts.elastic_samples;
        const double product = std::pow(inter, 2.0 / 3.0) * std::cbrt(el);
        prof.product_values.push_back(product);
        prof.compensated.push_back(std::pow(h, 2.0 / 3.0) * product);
    }

    // log-log fit over positive products
    std::vector<double> xs, ys;
    for (std::size_t m = 0; m < h_values.size(); ++m)
        if (prof.product_values[m] > 0.0) {
            xs.push_back(h_values[m]);
            ys.push_back(prof.product_values[m]);
        }
    if (xs.size() >= 2) fit_loglog(xs, ys, prof.fitted_slope, prof.fit_residual);
    return prof;
}

std::vector<RescalingAuditRow> rescaling_audit(const Microstructure& ms,
                                               const std::vector<double>& r_values) {
    const EnergyBreakdown base = total_energy(ms);
    std::vector<RescalingAuditRow> out;
    for (double r : r_values) {
        const Microstructure hat = rescale(ms, r);
        const EnergyBreakdown e = total_energy(hat);
        const double factor = rescaling_factor(r);
        RescalingAuditRow row;
        row.r = r;
        row.ratio_total = e.total / (factor * base.total);
        row.ratio_elastic = (base.elastic > 0.0) ? e.elastic / (factor * base.elastic) : 1.0;
        row.ratio_interfacial =
            (base.interfacial > 0.0) ? e.interfacial / (factor * base.interfacial) : 1.0;
        out.push_back(row);
    }
    return out;
}

OdeCheckResult ode_bound_check(const std::vector<double>& f_samples,
                               const std::vector<double>& g_samples, double slack) {
    const std::size_t n = f_samples.size();
    if (n < 2 || g_samples.size() != n)
        throw std::invalid_argument("ode_bound_check: matching sample vectors of length >= 2");
    if (std::abs(f_samples[0]) > slack)
        throw std::invalid_argument("ode_bound_check: f(0) must vanish");
    for (double g : g_samples)
        if (g < 0.0) throw std::invalid_argument("ode_bound_check: g must be nonnegative");

    const double dt = 1.0 / static_cast<double>(n - 1);
    OdeCheckResult res;
    res.hypothesis_holds = true;
    res.worst_hypothesis_gap = std::numeric_limits<double>::max();
    for (std::size_t m = 0; m + 1 < n; ++m) {
        const double fp = (f_samples[m + 1] - f_samples[m]) / dt;
        const double fmax = std::max(f_samples[m], f_samples[m + 1]);
        const double gmax = std::max(g_samples[m], g_samples[m + 1]);
        const double bound = std::sqrt(std::max(fmax, 0.0)) * std::sqrt(gmax);
        res.worst_hypothesis_gap = std::min(res.worst_hypothesis_gap, bound - fp);
        if (fp > bound + slack) res.hypothesis_holds = false;
    }
    if (!res.hypothesis_holds) return res;

    res.conclusion_holds = true;
    res.worst_margin = std::numeric_limits<double>::max();
    double g_running = 0.0;
    for (std::size_t m = 1; m < n; ++m) {
        g_running += 0.5 * (g_samples[m - 1] + g_samples[m]) * dt;
        const double t = m * dt;
        const double rhs = t * t * (g_running / t);
        res.worst_margin = std::min(res.worst_margin, rhs - f_samples[m]);
        if (f_samples[m] > rhs + slack) res.conclusion_holds = false;
    }
    return res;
}

}  // namespace twinlab
