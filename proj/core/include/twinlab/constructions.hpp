#pragma once

#include <functional>
#include <vector>

#include "twinlab/energy.hpp"

namespace twinlab {

// ---------------------------------------------------------------------------
// simple twins
// ---------------------------------------------------------------------------

/// Periodic square-wave indicator on the real line.
struct PeriodicIndicator {
    double period = 1.0;
    double fraction = 0.5;  // measure fraction of {1} per period
    double offset = 0.0;

    bool operator()(double s) const {
        double t = (s - offset) / period;
        t -= std::floor(t);
        return t < fraction;
    }
};

struct LaminateSpec {
    int variant_i = 1;            // first variant of the pair; carries `fraction`
    int variant_j = 2;
    TwinNormal normal = ::twinlab::twin_normal(3, +1);  // in the pair N_k, k not in {i,j}
    double fraction = 0.5;        // volume fraction of variant_i, in (0,1)
    double period = 0.25;
    double offset = 0.0;          // 0 places a variant_i slab centered at s = 0
};

struct LaminateBuild {
    Microstructure ms;
    // macroscopic (weak limit) displacement gradient
    std::function<Mat3(const Vec3&)> limit_gradient;
    // limiting volume fractions theta_0..theta_3
    std::function<Vec4(const Vec3&)> theta;
    Vec3 jump_vector;  // gradient jump a with [Du] = a (x) nu across interfaces
};

/// Canonical frame for a twin normal: grid axis 0 along nu, axis 1 along the
/// conjugate normal, axis 2 completing the right-handed triple. Interfaces are
/// then grid planes.
Mat3 laminate_frame(const TwinNormal& normal);

/// Stress-free simple twin: chi alternates between the two variants in slabs
/// of widths fraction*period and (1-fraction)*period along nu, and u is the
/// continuous piecewise-affine displacement whose gradient jumps by the exact
/// rank-one connection across each interface.
LaminateBuild simple_laminate(const LaminateSpec& spec, const BoxDomain& domain, double eta);

// ---------------------------------------------------------------------------
// planar checkerboards
// ---------------------------------------------------------------------------

struct CheckerboardSpec {
    int variant_i = 1;        // the distinguished variant index
    TwinNormal nu_next = ::twinlab::twin_normal(2, +1);  // in N_{i+1}
    TwinNormal nu_prev = ::twinlab::twin_normal(3, +1);  // in N_{i-1}
    double a = 0.5;
    double b = 0.5;           // a + b = 1, a,b >= 0
    PeriodicIndicator set_A;  // 1D indicator fed with x . nu_next
    PeriodicIndicator set_B;  // 1D indicator fed with x . nu_prev
};

struct CheckerboardBuild {
    std::array<ScalarField, 4> theta;    // theta_0..theta_3 (theta_0 is zero)
    std::array<ScalarField, 4> regions;  // indicators of the four constancy sets
    // Region order: {th_i=0, th_{i+1}=b, th_{i-1}=a}, {th_i=1-b, th_{i+1}=b, th_{i-1}=0},
    //               {th_i=1-a, th_{i+1}=0, th_{i-1}=a}, {th_i=1, th_{i+1}=0, th_{i-1}=0}.
    std::function<Vec4(const Vec3&)> theta_sampler;
};

/// Volume-fraction fields of a planar checkerboard:
///   theta_i     = 1 - a chi_A(x.nu_{i+1}) - b chi_B(x.nu_{i-1})
///   theta_{i+1} = b chi_B(x.nu_{i-1})
///   theta_{i-1} = a chi_A(x.nu_{i+1})
/// together with the indicators of the four regions where theta is constant.
CheckerboardBuild checkerboard(const CheckerboardSpec& spec, const BoxDomain& domain);

// ---------------------------------------------------------------------------
// branched habit plane
// ---------------------------------------------------------------------------

struct BranchTreeSpec {
    int depth = 6;                    // number of refinement generations
    double base_period = 1.0;         // twin period of the coarsest generation
    double period_ratio = 0.5;        // successive period ratio (halving)
    double layer_thickness_ratio = 0.6299605249474366;  // 2^{-2/3}; successive layer ratio
    double tower_height = 0.48;       // distance from the habit plane where refinement starts
    TwinNormal twin_normal = ::twinlab::twin_normal(3, +1);   // in N_3
    TwinNormal habit_normal = ::twinlab::twin_normal(1, +1);  // in N_1
};

struct BranchLayer {
    double period = 0.0;       // twin period of this generation
    double thickness = 0.0;    // layer height along the habit normal
    double s_top = 0.0;        // distance band [s_top - thickness, s_top]
    double elastic = 0.0;      // closed-form layer energies per unit cross-section
    double interfacial = 0.0;
};

struct BranchTreeBuild {
    Microstructure ms;
    std::function<Mat3(const Vec3&)> limit_gradient;
    std::function<Vec4(const Vec3&)> theta;
    std::vector<BranchLayer> layers;
    Vec3 habit_normal;        // unit, = spec.habit_normal
    Vec3 twin_normal;         // unit, = spec.twin_normal
    Vec3 transversal;         // unit, orthogonal to the twin normal, positive habit component
    double taper_depth = 0.0; // below this distance the finest pattern is tapered to zero
};

/// Domain for the branched construction: grid axis 0 along the twin normal,
/// axis 1 along the transversal direction (orthogonal to the twin normal,
/// positive component along the habit normal), axis 2 extruded. The habit
/// plane {x . nu_1 = 0} crosses the box obliquely.
BoxDomain make_branch_domain(const BranchTreeSpec& spec, int n0, int n1,
                             double width = 1.0, double austenite_margin = 0.08,
                             double top_margin = 0.06);

/// Finite-energy habit plane: austenite (u = 0) on x.nu_1 < 0; variants 1/2
/// twinned normal to nu_3 with fractions (1/3, 2/3) on x.nu_1 > 0. The twin
/// period refines geometrically toward the plane over `depth` generations;
/// each generation band morphs one minority band into two, and the shear
/// accumulation function is integrated exactly so the only elastic misfit is
/// the in-layer rearrangement term.
BranchTreeBuild branched_habit_plane(const BranchTreeSpec& spec, const BoxDomain& domain,
                                     double eta);

/// Closed-form per-generation energies (per unit cross-section area) of the
/// morphing construction:
///   elastic_l     = (22.5/108) eta^{-2/3} p_l^2 / H_l
///   interfacial_l = 8 eta^{1/3} H_l / p_l
/// with an arbitrary thickness profile H_l.
std::vector<BranchLayer> branch_layer_energies(double base_period, double period_ratio,
                                               const std::function<double(int)>& thickness_of,
                                               double eta, int depth);

/// Thickness profile balancing the two closed-form layer energies
/// (H_l proportional to eta^{-1/2} p_l^{3/2}).
double equipartition_thickness(double period, double eta);

/// An eta for which the closed-form tower elastic and interfacial totals agree.
double suggested_eta(const BranchTreeSpec& spec);

// ---------------------------------------------------------------------------
// interface clustering
// ---------------------------------------------------------------------------

struct ClusterSpec {
    double epsilon = 1.0 / 3.0;   // trace dimension = 2/3 - epsilon
    int generations = 3;
    Vec3 transversal_direction = Vec3(1.0, -1.0, 0.0) / std::sqrt(2.0);  // a twin normal
    double period_coupling = 0.25;  // fine period = coupling * eta^{1/3} d^{1/3}
    // When true, segments alternate the twin-normal class between the two
    // members of the pair instead of alternating fractions.
    bool conjugate_classes = false;

    double trace_dimension() const { return 2.0 / 3.0 - epsilon; }
    double cantor_ratio() const { return std::pow(2.0, -1.0 / trace_dimension()); }
};

struct ClusterSegment {
    double lo = 0.0, hi = 0.0;
    double fraction = 0.5;   // fine-twin volume fraction of variant 1
    double period = 0.0;     // fine period used inside the segment
    bool cantor_interval = false;  // true on the 2^g retained intervals
    int normal_sign = +1;    // twin-normal sign used (conjugate mode)
};

struct ClusterBuild {
    Microstructure ms;
    std::function<Mat3(const Vec3&)> limit_gradient;
    std::function<Vec4(const Vec3&)> theta;
    std::vector<double> interface_positions;  // large-scale interface coordinates
    std::vector<ClusterSegment> segments;
    // Indicator of the Cantor-interval slabs; its boundaries are the
    // clustering trace.
    ScalarField coarse_indicator;
};

/// Endpoints of the two-branch Cantor iteration with ratio `ratio` after
/// `generations` steps, mapped onto [lo, hi]. Exact dyadic arithmetic for
/// dyadic ratios.
std::vector<double> cantor_endpoints(double ratio, int generations, double lo, double hi);

/// Grid domain for the clustering construction: axis 0 along the transversal
/// direction, axis 1 along the conjugate normal.
BoxDomain make_cluster_domain(const ClusterSpec& spec, int n0, int n1, double length = 1.0);

/// Two-scale laminate whose large-scale interfaces sit on the Cantor endpoint
/// set along the transversal direction. Between consecutive interfaces at
/// distance d the fine twin period is coupling * eta^{1/3} d^{1/3} (rounded to
/// an integer number of periods), which makes the per-segment interfacial
/// energy scale like d^{2/3}; the construction is stress-free in the default
/// (fraction-alternating) mode.
ClusterBuild clustering_laminate(const ClusterSpec& spec, const BoxDomain& domain, double eta);

/// Closed-form per-segment interfacial energy (per unit cross-section) of the
/// clustering construction: eta^{1/3} * 2 * (number of fine interfaces).
double cluster_segment_energy(double d, double eta, double coupling);

// ---------------------------------------------------------------------------
// eta sequences
// ---------------------------------------------------------------------------

/// A family of microstructures over one geometry with eta decreasing
/// dyadically; the weak-limit fields come from the construction.
struct EtaSequence {
    std::vector<Microstructure> members;  // eta halves from one member to the next
    std::function<Mat3(const Vec3&)> limit_gradient;
    std::function<Vec4(const Vec3&)> theta;

    const Microstructure& finest() const { return members.back(); }
    const Microstructure& next_finest() const { return members[members.size() - 2]; }
};

/// Laminate sequence: member m has eta_m = eta0 2^{-m} and period scaled by
/// (eta_m/eta0)^{1/3}, so the interfacial energy stays bounded along the
/// sequence.
EtaSequence laminate_eta_sequence(const LaminateSpec& spec, const BoxDomain& domain,
                                  double eta0, int count);

/// Branched-tree sequence with the base period coupled to eta^{1/3}.
EtaSequence branch_eta_sequence(const BranchTreeSpec& spec, const BoxDomain& domain,
                                double eta0, int count);

}  // namespace twinlab
