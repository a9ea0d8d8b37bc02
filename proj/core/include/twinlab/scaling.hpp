#pragma once

#include <vector>

#include "twinlab/constructions.hpp"

namespace twinlab {

/// Sorted interface coordinates on a transversal line segment.
struct TraceSet {
    std::vector<double> points;   // strictly inside, ascending
    double ambient_length = 1.0;

    TraceSet(std::vector<double> pts, double length);
};

struct DimensionEstimate {
    double dimension = 0.0;
    double residual = 0.0;
    std::vector<double> scales;
    std::vector<std::size_t> counts;
};

/// Box-counting (Minkowski) dimension of the trace: least-squares slope of
/// log N(eps) against log(1/eps) over the given scales.
DimensionEstimate box_counting_dimension(const TraceSet& trace,
                                         const std::vector<double>& scales);

/// Dyadic scales eps = len * 2^{-k}, k = k_min..k_max.
std::vector<double> dyadic_scales(double len, int k_min, int k_max);

/// Blow-up of the energy densities toward a habit-plane point x':
///   product(h) = (E_inter density at x'+hd)^{2/3} * (mean over s in (0,h) of
///                 E_elast density at x'+sd)^{1/3}.
/// Densities are tube-averaged orthogonally to d.
struct BlowupProfile {
    std::vector<double> h_values;        // decreasing
    std::vector<double> product_values;
    std::vector<double> compensated;     // h^{2/3} * product
    double fitted_slope = 0.0;
    double fit_residual = 0.0;
};

struct BlowupOptions {
    // half-width of the averaging tube orthogonal to d, in cells
    double tube_radius_cells = 2.0;
    // number of quadrature samples for the running elastic mean
    int elastic_samples = 64;
};

/// Profile of the density product along x' + h d. The direction must be
/// transversal to the habit plane and orthogonal to the twinning direction
/// (d . nu_1 > 0, d . nu_3 = 0).
BlowupProfile blowup_profile(const Microstructure& ms, const ScalarField& elastic_density,
                             const ScalarField& interfacial_density, const Vec3& habit_normal,
                             const Vec3& twin_normal, const Vec3& x_prime, const Vec3& d,
                             const std::vector<double>& h_values, const BlowupOptions& opts = {});

/// Energy-rescaling audit: for each r the ratio of the computed energy of the
/// rescaled microstructure to r^{-3+2/3} times the original energy.
struct RescalingAuditRow {
    double r = 0.0;
    double ratio_total = 0.0;
    double ratio_elastic = 0.0;
    double ratio_interfacial = 0.0;
};
std::vector<RescalingAuditRow> rescaling_audit(const Microstructure& ms,
                                               const std::vector<double>& r_values);

/// Checker for the square-root differential inequality: when the sampled f
/// satisfies f' <= sqrt(f) sqrt(g) (finite differences, slack for roundoff),
/// the conclusion f(t) <= t^2 * (running mean of g) is verified at every
/// sample.
struct OdeCheckResult {
    bool hypothesis_holds = false;
    bool conclusion_holds = false;
    double worst_margin = 0.0;        // min over samples of rhs - f (conclusion)
    double worst_hypothesis_gap = 0.0;  // min over samples of bound - f'
};
OdeCheckResult ode_bound_check(const std::vector<double>& f_samples,
                               const std::vector<double>& g_samples, double slack = 1e-8);

}  // namespace twinlab
