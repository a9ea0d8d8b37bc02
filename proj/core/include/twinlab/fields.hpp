#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include "twinlab/crystallography.hpp"

namespace twinlab {

/// Axis-aligned sampling box with an orthonormal frame. Grid coordinates g
/// relate to lab coordinates by x = origin + frame^T g, i.e. the rows of
/// `frame` are the lab directions of the grid axes (lab-to-grid rotation).
class BoxDomain {
public:
    BoxDomain(const Vec3& origin, const Vec3& extent, const std::array<int, 3>& resolution,
              const Mat3& frame = Mat3::Identity());

    const Vec3& origin() const { return origin_; }
    const Vec3& extent() const { return extent_; }
    const std::array<int, 3>& resolution() const { return res_; }
    const Mat3& frame() const { return frame_; }

    std::size_t cell_count() const {
        return static_cast<std::size_t>(res_[0]) * res_[1] * res_[2];
    }
    Vec3 spacing() const {
        return {extent_[0] / res_[0], extent_[1] / res_[1], extent_[2] / res_[2]};
    }
    double cell_volume() const {
        const Vec3 h = spacing();
        return h[0] * h[1] * h[2];
    }
    double diameter() const { return extent_.norm(); }

    // Row-major with the last axis fastest.
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * res_[1] + j) * res_[2] + k;
    }

    Vec3 grid_point(int i, int j, int k) const {
        const Vec3 h = spacing();
        return {(i + 0.5) * h[0], (j + 0.5) * h[1], (k + 0.5) * h[2]};
    }
    Vec3 cell_center(int i, int j, int k) const { return lab_from_grid(grid_point(i, j, k)); }

    Vec3 lab_from_grid(const Vec3& g) const { return origin_ + frame_.transpose() * g; }
    Vec3 grid_from_lab(const Vec3& x) const { return frame_ * (x - origin_); }

    bool contains_lab(const Vec3& x) const {
        const Vec3 g = grid_from_lab(x);
        for (int a = 0; a < 3; ++a)
            if (g[a] < 0.0 || g[a] > extent_[a]) return false;
        return true;
    }

    // Cell whose center is nearest to the lab point (clamped to the grid).
    std::array<int, 3> nearest_cell(const Vec3& x) const;

    bool same_geometry(const BoxDomain& o, double tol = 1e-12) const;

private:
    Vec3 origin_;
    Vec3 extent_;
    std::array<int, 3> res_;
    Mat3 frame_;
};

/// Scalar samples at cell centers.
class ScalarField {
public:
    ScalarField(const BoxDomain& domain, double fill = 0.0)
        : domain_(domain), samples_(domain.cell_count(), fill) {}
    ScalarField(const BoxDomain& domain, std::vector<double> samples);

    const BoxDomain& domain() const { return domain_; }
    double& at(int i, int j, int k) { return samples_[domain_.index(i, j, k)]; }
    double at(int i, int j, int k) const { return samples_[domain_.index(i, j, k)]; }
    const std::vector<double>& samples() const { return samples_; }
    std::vector<double>& samples() { return samples_; }

    double integral() const;  // midpoint quadrature
    double l1_norm() const;

    // Values in {0,1} up to tol.
    bool is_indicator(double tol = 0.0) const;

    // Nearest-cell lookup (keeps indicator values crisp); zero-measure queries
    // outside the box are the caller's concern.
    double nearest_value(const Vec3& lab) const;
    // Trilinear interpolation with clamped cell centers.
    double trilinear_value(const Vec3& lab) const;

    static ScalarField from_function(const BoxDomain& domain,
                                     const std::function<double(const Vec3&)>& f);

private:
    BoxDomain domain_;
    std::vector<double> samples_;
};

/// Phase labels at cell centers plus derived one-hot indicators.
class PartitionField {
public:
    PartitionField(const BoxDomain& domain, uint8_t fill = 0)
        : domain_(domain), labels_(domain.cell_count(), fill) {}

    const BoxDomain& domain() const { return domain_; }
    uint8_t& at(int i, int j, int k) { return labels_[domain_.index(i, j, k)]; }
    uint8_t at(int i, int j, int k) const { return labels_[domain_.index(i, j, k)]; }
    const std::vector<uint8_t>& labels() const { return labels_; }

    ScalarField indicator(PhaseIndex phase) const;
    // Cell-count fractions of the four phases.
    Vec4 phase_fractions() const;

    static PartitionField from_function(const BoxDomain& domain,
                                        const std::function<int(const Vec3&)>& phase_of);

private:
    BoxDomain domain_;
    std::vector<uint8_t> labels_;
};

/// Displacement samples, optionally backed by closed-form samplers. When the
/// samplers are present they are the source of truth; grid samples agree with
/// them at cell centers.
class DisplacementField {
public:
    using Sampler = std::function<Vec3(const Vec3&)>;
    using GradientSampler = std::function<Mat3(const Vec3&)>;

    explicit DisplacementField(const BoxDomain& domain);
    DisplacementField(const BoxDomain& domain, Sampler u, GradientSampler grad_u);

    const BoxDomain& domain() const { return domain_; }
    Vec3 value_at(int i, int j, int k) const;
    void set_value(int i, int j, int k, const Vec3& v);

    bool has_analytic_sampler() const { return static_cast<bool>(sampler_); }
    bool has_analytic_gradient() const { return static_cast<bool>(grad_sampler_); }
    Vec3 sample(const Vec3& lab) const;       // analytic if present, else trilinear
    Mat3 gradient_sample(const Vec3& lab) const;  // analytic only

    const Sampler& sampler() const { return sampler_; }
    const GradientSampler& gradient_sampler() const { return grad_sampler_; }

private:
    BoxDomain domain_;
    std::vector<double> samples_;  // 3 per cell
    Sampler sampler_;
    GradientSampler grad_sampler_;
};

/// Field of symmetric tensors produced by symmetric_gradient.
struct SymmetricTensorField {
    explicit SymmetricTensorField(const BoxDomain& d)
        : domain(d), values(d.cell_count()) {}
    BoxDomain domain;
    std::vector<SymmetricTensor3> values;

    const SymmetricTensor3& at(int i, int j, int k) const {
        return values[domain.index(i, j, k)];
    }
    SymmetricTensor3& at(int i, int j, int k) { return values[domain.index(i, j, k)]; }
};

/// Radially symmetric compactly supported mollifier; the profile is the
/// standard bump exp(-1/(1-r^2)) on r < 1, normalized to unit mass in R^3.
struct MollifierSpec {
    double radius = 0.0;  // physical support radius after scaling

    // Unnormalized profile on the unit ball.
    static double unit_profile(double r) ;
    // Normalization constant c with  integral over R^3 of c*profile(|x|) = 1.
    static double unit_normalization();
};

struct MollifyResult {
    ScalarField field;
    bool applied = false;  // false when radius < one cell width
};

// --- operations ----------------------------------------------------------------

/// Per-cell symmetric gradient e(u) = (Du + Du^T)/2. Uses the analytic
/// gradient when available, otherwise central differences (one-sided at the
/// boundary).
SymmetricTensorField symmetric_gradient(const DisplacementField& u);

/// Perimeter of {chi = 1} estimated by face counting: the sum of interior
/// cell-face areas across which the indicator jumps. Exact for interfaces
/// aligned with grid planes.
double total_variation(const ScalarField& chi);

/// Isotropy-corrected diagnostic: quadrature of |grad chi_smooth| with a small
/// box smoothing. Reported alongside the face count for oblique interfaces.
double total_variation_corrected(const ScalarField& chi);

/// Convolution with the scaled bump profile, computed spectrally on the
/// periodic extension. Returns the input unchanged (applied=false) when the
/// radius is below one cell width. Throws if the radius exceeds half the
/// smallest extent.
MollifyResult mollify(const ScalarField& f, const MollifierSpec& m);

/// The discrete mollifier kernel restricted to the grid, normalized to sum 1.
/// Exposed so spectral consumers can damp with the exact same kernel.
std::vector<double> mollifier_kernel_grid(const BoxDomain& domain, double radius);

enum class OffGridSampling { NearestCell, Trilinear };

/// Difference quotient f(x + h d) - f(x) with the zero-outside-the-box
/// convention: the value is 0 unless both x and x + h d lie in the box.
ScalarField difference_quotient(const ScalarField& f, const Vec3& d, double h,
                                OffGridSampling sampling = OffGridSampling::NearestCell);

}  // namespace twinlab
