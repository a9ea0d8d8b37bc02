#pragma once

#include <optional>
#include <vector>

#include "twinlab/energy.hpp"

namespace twinlab {

/// Axis-aligned sub-box of a domain, in grid coordinates.
struct SubBox {
    Vec3 lo = Vec3::Zero();  // grid coordinates of the lower corner
    Vec3 hi = Vec3::Zero();

    bool contains_grid(const Vec3& g) const {
        for (int a = 0; a < 3; ++a)
            if (g[a] < lo[a] || g[a] > hi[a]) return false;
        return true;
    }
    double diameter() const { return (hi - lo).norm(); }
    // Distance from the sub-box to the domain boundary.
    double boundary_distance(const BoxDomain& d) const;
    SubBox inflated(double r, const BoxDomain& d) const;  // clipped to the domain
};

/// Difference-quotient norms over an (h, d) design plus the fitted decay
/// exponent. normalized(h) = h^{-2/3} l1(h); the seminorm estimate is the sup
/// of the normalized table.
struct BesovReport {
    std::vector<double> h_values;
    std::vector<Vec3> directions;
    std::vector<std::vector<double>> l1_table;         // [dir][h]
    std::vector<std::vector<double>> normalized_table; // [dir][h]
    std::vector<double> direction_slopes;              // log-log LS slope per direction
    std::vector<double> direction_residuals;
    double seminorm = 0.0;
    int sup_direction = -1;
    double fitted_exponent = 0.0;  // slope of the sup-attaining direction
    double fit_residual = 0.0;
};

struct DirectionDesign {
    std::vector<Vec3> directions;
};

/// Default design: the six twin normals, the three grid axes and ten
/// quasi-uniform sphere points.
DirectionDesign default_direction_design(const BoxDomain& domain);

/// L1 norm over U of the difference quotient of an indicator. Throws when the
/// margin condition dist(U, boundary) > margin_factor * h fails. Exact cell
/// sums; nearest-cell sampling keeps indicator values crisp.
double local_l1_difference(const ScalarField& chi, const SubBox& U, const Vec3& d, double h,
                           double margin_factor = 4.0);

/// Dyadic h set 2^{-k} diam(U), k = k_min..k_max, filtered by the margin
/// condition with the given factor.
std::vector<double> dyadic_h_set(const SubBox& U, const BoxDomain& domain, int k_min = 2,
                                 int k_max = 8, double margin_factor = 4.0);

/// Difference-quotient table over the design; least-squares decay exponents
/// per direction; seminorm sup of h^{-2/3}-normalized values. Directions whose
/// response is negligible relative to the strongest one are excluded from the
/// exponent fit.
BesovReport besov_seminorm(const ScalarField& chi, const SubBox& U,
                           const std::vector<double>& h_set, const DirectionDesign& design,
                           double margin_factor = 4.0);

enum class ComparatorMode { NondegenerateFractions, Checkerboard };

/// Right-hand-side comparator of the regularity estimate. Returns the ratio
///   l1 / (prefactor * Ei^{2/3} Ee^{1/3} h^{2/3})
/// with prefactor 1/epsilon (nondegenerate mode) or 1/min(a,b) (checkerboard
/// mode). A zero denominator with zero l1 gives ratio 0; a zero denominator
/// with positive l1 throws (inconsistent inputs).
double theorem_comparator_ratio(double l1_value, double interfacial_Uch, double elastic_Uch,
                                double parameter, double h,
                                ComparatorMode mode = ComparatorMode::NondegenerateFractions);

/// Integral of a density field over the inflated sub-box U + B(0, c h),
/// clipped to the domain (axis-aligned inflation).
double density_over_inflated(const ScalarField& density, const SubBox& U, double ch);

}  // namespace twinlab
