#pragma once

#include <array>
#include <vector>

#include "twinlab/besov.hpp"
#include "twinlab/constructions.hpp"

namespace twinlab {

/// Smooth compactly supported window: a product of one-dimensional bumps over
/// a sub-box, cut off at `cutoff` times the half-extent.
struct Window {
    SubBox box;
    double cutoff = 0.8;

    // psi at a grid point; 1 at the center, 0 outside the cutoff box
    double psi_grid(const Vec3& g) const;
};

/// Empirical angular distribution of the Fourier mass of one oscillating
/// strain component. Directions are antipodally identified; the six cone bins
/// sit around the twin-normal classes (order of all_twin_normals()).
struct AngularSpectrum {
    int component = 1;
    double delta = 0.0;
    double cone_half_angle_deg = 10.0;
    std::array<double, 6> cone_mass{};
    double other_mass = 0.0;
    double dc_mass = 0.0;
    std::vector<double> fine_mass;  // 312-cell equal-area hemisphere diagnostic
    double windowed_energy = 0.0;   // integral of (psi osc)^2, equals total + dc by Parseval
    double psi2_integral = 0.0;
    double richardson_rel_change = -1.0;  // set when a coarser member was compared

    double total_directional() const {
        double s = other_mass;
        for (double m : cone_mass) s += m;
        return s;
    }
};

/// Oscillation of the i-th diagonal strain component around its weak limit,
/// d_i u_i - d_i u_limit, evaluated from the analytic gradients.
ScalarField oscillation_field(const Microstructure& ms,
                              const std::function<Mat3(const Vec3&)>& limit_gradient,
                              int component);

/// Windowed angular spectrum of a scalar oscillation field. For delta > 0 the
/// windowed spectrum is damped by the squared transform of the discrete
/// mollifier kernel at radius delta * eta^{1/3} (so the damped mass never
/// exceeds the undamped one, bin by bin). Throws when the window support
/// touches the domain boundary.
AngularSpectrum angular_spectrum_of_field(const ScalarField& osc, const Window& window,
                                          double delta, double eta, int component);

/// Spectrum of the finest member of the sequence with a Richardson comparison
/// against the next-finest.
AngularSpectrum angular_spectrum(const EtaSequence& seq, int component, const Window& window,
                                 double delta = 0.0);

/// Oscillation-mass identity: the total directional mass (times 2, per the
/// gradient representation) against
///   integral of psi^2 (18 th_i(1-th_i) - 12 th_0 th_i + 2 th_0(1-th_0)).
struct MassIdentityReport {
    double measured = 0.0;
    double predicted = 0.0;
    double rel_deviation = 0.0;
};
MassIdentityReport mass_identity_check(const std::function<Vec4(const Vec3&)>& theta,
                                       const AngularSpectrum& spectrum, const Window& window,
                                       const BoxDomain& domain, int component);

/// Per-window dominance of a single oscillation direction. A window is flagged
/// when the second-largest cone-class mass exceeds `flag_ratio` of the largest
/// (and the window carries non-negligible mass).
struct WindowDominance {
    Vec3 center_grid = Vec3::Zero();
    int top_class = -1;
    double top_mass = 0.0;
    int second_class = -1;
    double second_mass = 0.0;
    bool flagged = false;
};
std::vector<WindowDominance> single_direction_check(const ScalarField& osc, double eta,
                                                    const std::array<int, 3>& tiles,
                                                    double flag_ratio = 0.1,
                                                    double mass_floor_rel = 1e-9);

/// Windowed bounds on the mollified oscillation density:
///   18 th_i(1-th_i) - 36 delta E_inter_density <= tau_delta <= 18 th_i(1-th_i)
/// (window averages; E_inter density of the finest member).
struct MollifiedMassReport {
    double delta = 0.0;
    double tau = 0.0;
    double upper = 0.0;
    double lower = 0.0;
};
std::vector<MollifiedMassReport> mollified_mass_bounds(const EtaSequence& seq, int component,
                                                       const Window& window,
                                                       const std::vector<double>& deltas);

/// Fraction of directional mass outside the admissible cone classes of the
/// component, per sequence member (coarse to fine).
struct WaveSupportReport {
    std::vector<double> off_support_fraction;  // one entry per member
    bool has_mass = true;
};
WaveSupportReport wave_support_check(const EtaSequence& seq, int component, const Window& window);

/// Transport check: finite differences of the windowed class mass along a
/// direction orthogonal to the class normal, divided by the bound
/// (1/delta) sqrt(mass) sqrt(elastic density).
struct TransportSample {
    double position = 0.0;   // window-center coordinate along d
    double class_density = 0.0;
    double derivative = 0.0;
    double bound = 0.0;
    double ratio = 0.0;
};
std::vector<TransportSample> transport_ratio(const EtaSequence& seq, int component,
                                             int normal_class, const Vec3& d, double delta,
                                             const Window& window_template, int n_centers,
                                             double center_span);

/// Equal-area 312-cell hemisphere binning used by the diagnostic grid.
int fine_bin_of_direction(const Vec3& dir);
constexpr int kFineBins = 312;

}  // namespace twinlab
