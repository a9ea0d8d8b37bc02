#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "twinlab/fields.hpp"

namespace twinlab {

/// A displacement/partition pair at interface-scale parameter eta. Both fields
/// share one box domain. The optional phase sampler evaluates the partition in
/// closed form at arbitrary lab points (used by rescaling and off-grid lookups).
struct Microstructure {
    Microstructure(DisplacementField u_, PartitionField chi_, double eta_);

    DisplacementField u;
    PartitionField chi;
    double eta;
    std::function<int(const Vec3&)> phase_sampler;  // optional

    const BoxDomain& domain() const { return u.domain(); }
};

/// Scaled energy of a microstructure together with per-cell Lebesgue densities
/// of the two terms.
struct EnergyBreakdown {
    double elastic = 0.0;
    double interfacial = 0.0;
    double total = 0.0;
    double eta = 0.0;
    ScalarField elastic_density;
    ScalarField interfacial_density;
};

struct EnergyOptions {
    // The interfacial sum runs over the three variant indicators only; setting
    // this also counts the austenite indicator.
    bool include_austenite_interfaces = false;
};

/// eta^{-2/3} * integral of |e(u) - sum_i chi_i e_i|^2. Returns the total and
/// the per-cell density (value of the integrand times eta^{-2/3}).
std::pair<double, ScalarField> elastic_energy(const Microstructure& ms);

/// eta^{1/3} * sum_i TV(chi_i) over the variant indicators. The density field
/// assigns half of each face contribution to the two adjacent cells.
std::pair<double, ScalarField> interfacial_energy(const Microstructure& ms,
                                                  const EnergyOptions& opts = {});

EnergyBreakdown total_energy(const Microstructure& ms, const EnergyOptions& opts = {});

/// Spatial rescaling x = r x_hat: the new microstructure has domain scaled by
/// 1/r, u_hat(x_hat) = u(r x_hat)/r, chi_hat(x_hat) = chi(r x_hat) and
/// eta_hat = eta / r. Energies transform by the factor r^{-3+2/3}. Grid samples
/// are resampled exactly (cell centers map onto cell centers).
Microstructure rescale(const Microstructure& ms, double r);

/// The exact energy scaling factor r^{-3+2/3}.
inline double rescaling_factor(double r) { return std::pow(r, -3.0 + 2.0 / 3.0); }

}  // namespace twinlab
