#include "twinlab/fields.hpp"

#include <algorithm>
#include <cmath>

#include <fftw3.h>

namespace twinlab {

// --- BoxDomain -----------------------------------------------------------------

BoxDomain::BoxDomain(const Vec3& origin, const Vec3& extent,
                     const std::array<int, 3>& resolution, const Mat3& frame)
    : origin_(origin), extent_(extent), res_(resolution), frame_(frame) {
    for (int a = 0; a < 3; ++a) {
        if (extent_[a] <= 0.0) throw std::invalid_argument("BoxDomain: extent must be positive");
        if (res_[a] < 1) throw std::invalid_argument("BoxDomain: resolution must be positive");
    }
    if ((frame_ * frame_.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("BoxDomain: frame must be orthonormal");
}

std::array<int, 3> BoxDomain::nearest_cell(const Vec3& x) const {
    const Vec3 g = grid_from_lab(x);
    const Vec3 h = spacing();
    std::array<int, 3> c;
    for (int a = 0; a < 3; ++a) {
        int i = static_cast<int>(std::floor(g[a] / h[a]));
        c[a] = std::clamp(i, 0, res_[a] - 1);
    }
    return c;
}

bool BoxDomain::same_geometry(const BoxDomain& o, double tol) const {
    return res_ == o.res_ && (origin_ - o.origin_).norm() <= tol &&
           (extent_ - o.extent_).norm() <= tol &&
           (frame_ - o.frame_).cwiseAbs().maxCoeff() <= tol;
}

// --- ScalarField ----------------------------------------------------------------

ScalarField::ScalarField(const BoxDomain& domain, std::vector<double> samples)
    : domain_(domain), samples_(std::move(samples)) {
    if (samples_.size() != domain_.cell_count())
        throw std::invalid_argument("ScalarField: sample count must match the grid");
}

double ScalarField::integral() const {
    double s = 0.0;
    for (double v : samples_) s += v;
    return s * domain_.cell_volume();
}

double ScalarField::l1_norm() const {
    double s = 0.0;
    for (double v : samples_) s += std::abs(v);
    return s * domain_.cell_volume();
}

bool ScalarField::is_indicator(double tol) const {
    for (double v : samples_)
        if (std::abs(v) > tol && std::abs(v - 1.0) > tol) return false;
    return true;
}

double ScalarField::nearest_value(const Vec3& lab) const {
    const auto c = domain_.nearest_cell(lab);
    return at(c[0], c[1], c[2]);
}

double ScalarField::trilinear_value(const Vec3& lab) const {
    const Vec3 g = domain_.grid_from_lab(lab);
    const Vec3 h = domain_.spacing();
    const auto& n = domain_.resolution();
    double w[3][2];
    int base[3];
    for (int a = 0; a < 3; ++a) {
        double t = g[a] / h[a] - 0.5;  // cell-center coordinates
        t = std::clamp(t, 0.0, static_cast<double>(n[a] - 1));
        base[a] = std::min(static_cast<int>(std::floor(t)), n[a] - 2);
        base[a] = std::max(base[a], 0);
        double f = (n[a] > 1) ? t - base[a] : 0.0;
        w[a][0] = 1.0 - f;
        w[a][1] = f;
    }
    double v = 0.0;
    for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < 2; ++dk) {
                int i = std::min(base[0] + di, n[0] - 1);
                int j = std::min(base[1] + dj, n[1] - 1);
                int k = std::min(base[2] + dk, n[2] - 1);
                v += w[0][di] * w[1][dj] * w[2][dk] * at(i, j, k);
            }
    return v;
}

ScalarField ScalarField::from_function(const BoxDomain& domain,
                                       const std::function<double(const Vec3&)>& f) {
    ScalarField out(domain);
    const auto& n = domain.resolution();
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) out.at(i, j, k) = f(domain.cell_center(i, j, k));
    return out;
}

// --- PartitionField ---------------------------------------------------------------

ScalarField PartitionField::indicator(PhaseIndex phase) const {
    ScalarField out(domain_);
    const uint8_t p = static_cast<uint8_t>(phase.value());
    auto& s = out.samples();
    for (std::size_t c = 0; c < labels_.size(); ++c) s[c] = (labels_[c] == p) ? 1.0 : 0.0;
    return out;
}

Vec4 PartitionField::phase_fractions() const {
    Vec4 f = Vec4::Zero();
    for (uint8_t l : labels_) f[l] += 1.0;
    return f / static_cast<double>(labels_.size());
}

PartitionField PartitionField::from_function(const BoxDomain& domain,
                                             const std::function<int(const Vec3&)>& phase_of) {
    PartitionField out(domain);
    const auto& n = domain.resolution();
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                int p = phase_of(domain.cell_center(i, j, k));
                if (p < 0 || p > 3) throw std::invalid_argument("PartitionField: labels in {0..3}");
                out.at(i, j, k) = static_cast<uint8_t>(p);
            }
    return out;
}

// --- DisplacementField --------------------------------------------------------------

DisplacementField::DisplacementField(const BoxDomain& domain)
    : domain_(domain), samples_(3 * domain.cell_count(), 0.0) {}

DisplacementField::DisplacementField(const BoxDomain& domain, Sampler u, GradientSampler grad_u)
    : domain_(domain), samples_(3 * domain.cell_count()), sampler_(std::move(u)),
      grad_sampler_(std::move(grad_u)) {
    const auto& n = domain_.resolution();
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                const Vec3 v = sampler_(domain_.cell_center(i, j, k));
                const std::size_t c = 3 * domain_.index(i, j, k);
                samples_[c] = v[0];
                samples_[c + 1] = v[1];
                samples_[c + 2] = v[2];
            }
}

Vec3 DisplacementField::value_at(int i, int j, int k) const {
    const std::size_t c = 3 * domain_.index(i, j, k);
    return {samples_[c], samples_[c + 1], samples_[c + 2]};
}

void DisplacementField::set_value(int i, int j, int k, const Vec3& v) {
    const std::size_t c = 3 * domain_.index(i, j, k);
    samples_[c] = v[0];
    samples_[c + 1] = v[1];
    samples_[c + 2] = v[2];
}

Vec3 DisplacementField::sample(const Vec3& lab) const {
    if (sampler_) return sampler_(lab);
    // component-wise trilinear interpolation
    const auto& n = domain_.resolution();
    const Vec3 g = domain_.grid_from_lab(lab);
    const Vec3 h = domain_.spacing();
    double w[3][2];
    int base[3];
    for (int a = 0; a < 3; ++a) {
        double t = std::clamp(g[a] / h[a] - 0.5, 0.0, static_cast<double>(n[a] - 1));
        base[a] = std::max(std::min(static_cast<int>(std::floor(t)), n[a] - 2), 0);
        double f = (n[a] > 1) ? t - base[a] : 0.0;
        w[a][0] = 1.0 - f;
        w[a][1] = f;
    }
    Vec3 out = Vec3::Zero();
    for (int di = 0; di < 2; ++di)
        for (int dj = 0; dj < 2; ++dj)
            for (int dk = 0; dk < 2; ++dk) {
                int i = std::min(base[0] + di, n[0] - 1);
                int j = std::min(base[1] + dj, n[1] - 1);
                int k = std::min(base[2] + dk, n[2] - 1);
                out += w[0][di] * w[1][dj] * w[2][dk] * value_at(i, j, k);
            }
    return out;
}

Mat3 DisplacementField::gradient_sample(const Vec3& lab) const {
    if (!grad_sampler_)
        throw std::logic_error("DisplacementField: no analytic gradient sampler");
    return grad_sampler_(lab);
}

// --- symmetric gradient ---------------------------------------------------------------

SymmetricTensorField symmetric_gradient(const DisplacementField& u) {
    const BoxDomain& d = u.domain();
    const auto& n = d.resolution();
    for (int a = 0; a < 3; ++a)
        if (n[a] < 2 && !u.has_analytic_gradient())
            throw std::invalid_argument("symmetric_gradient: needs >= 2 cells per axis");

    SymmetricTensorField out(d);
    if (u.has_analytic_gradient()) {
        for (int i = 0; i < n[0]; ++i)
            for (int j = 0; j < n[1]; ++j)
                for (int k = 0; k < n[2]; ++k)
                    out.at(i, j, k) =
                        SymmetricTensor3::symmetric_part(u.gradient_sample(d.cell_center(i, j, k)));
        return out;
    }

    const Vec3 h = d.spacing();
    const Mat3& frame = d.frame();
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                Mat3 grad_grid;  // grad_grid(c,a) = d u_c / d g_a
                const int idx[3] = {i, j, k};
                for (int a = 0; a < 3; ++a) {
                    int lo = idx[a] - 1, hi = idx[a] + 1;
                    double denom = 2.0 * h[a];
                    if (lo < 0) { lo = idx[a]; denom = h[a]; }
                    if (hi > n[a] - 1) { hi = idx[a]; denom = h[a]; }
                    int ilo[3] = {i, j, k}, ihi[3] = {i, j, k};
                    ilo[a] = lo;
                    ihi[a] = hi;
                    const Vec3 dv =
                        u.value_at(ihi[0], ihi[1], ihi[2]) - u.value_at(ilo[0], ilo[1], ilo[2]);
                    for (int c = 0; c < 3; ++c) grad_grid(c, a) = dv[c] / denom;
                }
                out.at(i, j, k) = SymmetricTensor3::symmetric_part(grad_grid * frame);
            }
    return out;
}

// --- total variation ---------------------------------------------------------------

double total_variation(const ScalarField& chi) {
    if (!chi.is_indicator())
        throw std::invalid_argument("total_variation: samples must be binary");
    const BoxDomain& d = chi.domain();
    const auto& n = d.resolution();
    const Vec3 h = d.spacing();
    const double area[3] = {h[1] * h[2], h[0] * h[2], h[0] * h[1]};

    double tv = 0.0;
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                const double v = chi.at(i, j, k);
                if (i + 1 < n[0] && chi.at(i + 1, j, k) != v) tv += area[0];
                if (j + 1 < n[1] && chi.at(i, j + 1, k) != v) tv += area[1];
                if (k + 1 < n[2] && chi.at(i, j, k + 1) != v) tv += area[2];
            }
    return tv;
}

double total_variation_corrected(const ScalarField& chi) {
    if (!chi.is_indicator())
        throw std::invalid_argument("total_variation_corrected: samples must be binary");
    const BoxDomain& d = chi.domain();
    const Vec3 h = d.spacing();
    MollifierSpec m;
    m.radius = 2.5 * h.minCoeff();
    const ScalarField smooth = mollify(chi, m).field;

    const auto& n = d.resolution();
    double tv = 0.0;
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                Vec3 g = Vec3::Zero();
                const int idx[3] = {i, j, k};
                for (int a = 0; a < 3; ++a) {
                    if (n[a] < 2) continue;
                    int lo = idx[a] - 1, hi = idx[a] + 1;
                    double denom = 2.0 * h[a];
                    if (lo < 0) { lo = idx[a]; denom = h[a]; }
                    if (hi > n[a] - 1) { hi = idx[a]; denom = h[a]; }
                    int ilo[3] = {i, j, k}, ihi[3] = {i, j, k};
                    ilo[a] = lo;
                    ihi[a] = hi;
                    g[a] = (smooth.at(ihi[0], ihi[1], ihi[2]) - smooth.at(ilo[0], ilo[1], ilo[2])) /
                           denom;
                }
                tv += g.norm();
            }
    return tv * d.cell_volume();
}

// --- mollifier -----------------------------------------------------------------------

double MollifierSpec::unit_profile(double r) {
    if (r >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - r * r));
}

double MollifierSpec::unit_normalization() {
    // 4 pi int_0^1 r^2 exp(-1/(1-r^2)) dr, Simpson quadrature, cached.
    static const double c = [] {
        const int n = 4000;
        const double dr = 1.0 / n;
        double s = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double r = i * dr;
            const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            s += w * r * r * unit_profile(r);
        }
        s *= dr / 3.0;
        return 1.0 / (4.0 * M_PI * s);
    }();
    return c;
}

std::vector<double> mollifier_kernel_grid(const BoxDomain& domain, double radius) {
    const auto& n = domain.resolution();
    const Vec3 h = domain.spacing();
    std::vector<double> kernel(domain.cell_count(), 0.0);
    double sum = 0.0;
    // Periodic (minimum-image) displacements; kernel centered at cell (0,0,0).
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                const int idx[3] = {i, j, k};
                Vec3 dx;
                for (int a = 0; a < 3; ++a) {
                    int d = idx[a];
                    if (d > n[a] / 2) d -= n[a];
                    dx[a] = d * h[a];
                }
                const double r = dx.norm() / radius;
                if (r >= 1.0) continue;
                const double w = MollifierSpec::unit_profile(r);
                kernel[domain.index(i, j, k)] = w;
                sum += w;
            }
    if (sum <= 0.0) throw std::runtime_error("mollifier_kernel_grid: empty kernel");
    for (double& w : kernel) w /= sum;
    return kernel;
}

namespace {

// In-place periodic convolution of `data` with `kernel` (both on the same grid).
void periodic_convolve(const BoxDomain& d, std::vector<double>& data,
                       const std::vector<double>& kernel) {
    const auto& n = d.resolution();
    const int n0 = n[0], n1 = n[1], n2 = n[2];
    const int nc = n2 / 2 + 1;
    const std::size_t csize = static_cast<std::size_t>(n0) * n1 * nc;

    fftw_complex* fdata = fftw_alloc_complex(csize);
    fftw_complex* fker = fftw_alloc_complex(csize);
    std::vector<double> ker = kernel;  // FFTW destroys r2c input

    fftw_plan p1 = fftw_plan_dft_r2c_3d(n0, n1, n2, data.data(), fdata, FFTW_ESTIMATE);
    fftw_plan p2 = fftw_plan_dft_r2c_3d(n0, n1, n2, ker.data(), fker, FFTW_ESTIMATE);
    fftw_execute(p1);
    fftw_execute(p2);

    const double scale = 1.0 / static_cast<double>(d.cell_count());
    for (std::size_t c = 0; c < csize; ++c) {
        const double ar = fdata[c][0], ai = fdata[c][1];
        const double br = fker[c][0], bi = fker[c][1];
        fdata[c][0] = (ar * br - ai * bi) * scale;
        fdata[c][1] = (ar * bi + ai * br) * scale;
    }

    fftw_plan p3 = fftw_plan_dft_c2r_3d(n0, n1, n2, fdata, data.data(), FFTW_ESTIMATE);
    fftw_execute(p3);

    fftw_destroy_plan(p1);
    fftw_destroy_plan(p2);
    fftw_destroy_plan(p3);
    fftw_free(fdata);
    fftw_free(fker);
}

}  // namespace

MollifyResult mollify(const ScalarField& f, const MollifierSpec& m) {
    const BoxDomain& d = f.domain();
    const Vec3 h = d.spacing();
    if (m.radius > 0.5 * d.extent().minCoeff())
        throw std::invalid_argument("mollify: radius exceeds half the domain extent");
    if (m.radius < h.minCoeff()) return {f, false};

    MollifyResult out{f, true};
    const auto kernel = mollifier_kernel_grid(d, m.radius);
    periodic_convolve(d, out.field.samples(), kernel);
    return out;
}

// --- difference quotient ----------------------------------------------------------------

ScalarField difference_quotient(const ScalarField& f, const Vec3& d, double h,
                                OffGridSampling sampling) {
    if (h <= 0.0) throw std::invalid_argument("difference_quotient: h must be positive");
    const Vec3 dir = d.normalized();
    const BoxDomain& dom = f.domain();
    const auto& n = dom.resolution();

    ScalarField out(dom, 0.0);
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                const Vec3 x = dom.cell_center(i, j, k);
                const Vec3 y = x + h * dir;
                if (!dom.contains_lab(y)) continue;  // zero outside the box
                const double fy = (sampling == OffGridSampling::NearestCell)
                                      ? f.nearest_value(y)
                                      : f.trilinear_value(y);
                out.at(i, j, k) = fy - f.at(i, j, k);
            }
    return out;
}

}  // namespace twinlab
