#include "twinlab/crystallography.hpp"

#include <cmath>

namespace twinlab {

SymmetricTensor3 SymmetricTensor3::symmetric_part(const Mat3& m) {
    return {m(0, 0), m(1, 1), m(2, 2),
            0.5 * (m(1, 2) + m(2, 1)),
            0.5 * (m(0, 2) + m(2, 0)),
            0.5 * (m(0, 1) + m(1, 0))};
}

SymmetricTensor3 SymmetricTensor3::from_matrix(const Mat3& m, double tol) {
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("SymmetricTensor3: matrix is not symmetric");
    return symmetric_part(m);
}

SymmetricTensor3 SymmetricTensor3::sym_outer(const Vec3& a, const Vec3& b) {
    Mat3 m = 0.5 * (a * b.transpose() + b * a.transpose());
    return symmetric_part(m);
}

double SymmetricTensor3::operator()(int i, int j) const {
    if (i == j) return c_[static_cast<std::size_t>(i)];
    int k = i + j;  // (1,2)->3: yz, (0,2)->2: xz, (0,1)->1: xy
    if (k == 3) return c_[3];
    if (k == 2) return c_[4];
    return c_[5];
}

Mat3 SymmetricTensor3::to_matrix() const {
    Mat3 m;
    m << c_[0], c_[5], c_[4],
         c_[5], c_[1], c_[3],
         c_[4], c_[3], c_[2];
    return m;
}

double SymmetricTensor3::squared_norm() const {
    return c_[0] * c_[0] + c_[1] * c_[1] + c_[2] * c_[2] +
           2.0 * (c_[3] * c_[3] + c_[4] * c_[4] + c_[5] * c_[5]);
}

double SymmetricTensor3::norm() const { return std::sqrt(squared_norm()); }

SymmetricTensor3 SymmetricTensor3::operator+(const SymmetricTensor3& o) const {
    SymmetricTensor3 r;
    for (std::size_t k = 0; k < 6; ++k) r.c_[k] = c_[k] + o.c_[k];
    return r;
}

SymmetricTensor3 SymmetricTensor3::operator-(const SymmetricTensor3& o) const {
    SymmetricTensor3 r;
    for (std::size_t k = 0; k < 6; ++k) r.c_[k] = c_[k] - o.c_[k];
    return r;
}

SymmetricTensor3 SymmetricTensor3::operator*(double s) const {
    SymmetricTensor3 r;
    for (std::size_t k = 0; k < 6; ++k) r.c_[k] = c_[k] * s;
    return r;
}

double SymmetricTensor3::max_abs_diff(const SymmetricTensor3& o) const {
    double m = 0.0;
    for (std::size_t k = 0; k < 6; ++k) m = std::max(m, std::abs(c_[k] - o.c_[k]));
    return m;
}

// --- normals -----------------------------------------------------------------

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;

std::array<TwinNormal, 6> make_normals() {
    // nu_1^+ = (0,1,1)/sqrt2,  nu_1^- = (0,1,-1)/sqrt2
    // nu_2^+ = (1,0,1)/sqrt2,  nu_2^- = (-1,0,1)/sqrt2
    // nu_3^+ = (1,1,0)/sqrt2,  nu_3^- = (1,-1,0)/sqrt2
    std::array<TwinNormal, 6> n;
    n[0] = {1, +1, Vec3(0.0, kInvSqrt2, kInvSqrt2)};
    n[1] = {1, -1, Vec3(0.0, kInvSqrt2, -kInvSqrt2)};
    n[2] = {2, +1, Vec3(kInvSqrt2, 0.0, kInvSqrt2)};
    n[3] = {2, -1, Vec3(-kInvSqrt2, 0.0, kInvSqrt2)};
    n[4] = {3, +1, Vec3(kInvSqrt2, kInvSqrt2, 0.0)};
    n[5] = {3, -1, Vec3(kInvSqrt2, -kInvSqrt2, 0.0)};
    return n;
}

const std::array<TwinNormal, 6>& normal_table() {
    static const std::array<TwinNormal, 6> table = make_normals();
    return table;
}

}  // namespace

TwinNormal TwinNormal::conjugate() const { return twin_normal(pair_index, -sign); }

bool TwinNormal::same_class(const TwinNormal& o, double tol) const {
    return same_class(o.components, tol);
}

bool TwinNormal::same_class(const Vec3& dir, double tol) const {
    return (components - dir).norm() < tol || (components + dir).norm() < tol;
}

const TwinNormal& twin_normal(int pair_index, int sign) {
    if (pair_index < 1 || pair_index > 3 || (sign != 1 && sign != -1))
        throw std::invalid_argument("twin_normal: pair index in {1,2,3}, sign in {+1,-1}");
    return normal_table()[static_cast<std::size_t>(2 * (pair_index - 1) + (sign > 0 ? 0 : 1))];
}

const std::array<TwinNormal, 6>& all_twin_normals() { return normal_table(); }

// --- wells --------------------------------------------------------------------

SymmetricTensor3 well_strain(PhaseIndex i) {
    switch (i.value()) {
        case 0: return SymmetricTensor3::zero();
        case 1: return SymmetricTensor3::diagonal(-2.0, 1.0, 1.0);
        case 2: return SymmetricTensor3::diagonal(1.0, -2.0, 1.0);
        default: return SymmetricTensor3::diagonal(1.0, 1.0, -2.0);
    }
}

RankOneDecomposition rank_one_decompose(PhaseIndex i, PhaseIndex j) {
    if (i.is_austenite() || j.is_austenite())
        throw std::invalid_argument("rank_one_decompose: variant indices only");
    if (i == j)
        throw std::invalid_argument("rank_one_decompose: needs two distinct variants");

    // The pair N_k with k not in {i,j}.
    const int k = 6 - i.value() - j.value();
    RankOneDecomposition d;
    d.nu_plus = twin_normal(k, +1);
    d.nu_minus = twin_normal(k, -1);

    // Canonical orientation: e_{i+1} - e_i = 6 nu+ (.) nu-; the reversed order
    // flips the scale, not the normals.
    d.scale = (i.next() == j) ? 6.0 : -6.0;
    return d;
}

std::array<TwinNormal, 4> admissible_normals(PhaseIndex i) {
    if (i.is_austenite())
        throw std::invalid_argument("admissible_normals: variant indices only");
    const int a = i.next().value();
    const int b = i.prev().value();
    return {twin_normal(a, +1), twin_normal(a, -1), twin_normal(b, +1), twin_normal(b, -1)};
}

// --- volume fractions ----------------------------------------------------------

VolumeFractions::VolumeFractions(const Vec4& theta, double tol) : theta_(theta) {
    for (int i = 0; i < 4; ++i)
        if (theta_[i] < -tol || theta_[i] > 1.0 + tol)
            throw std::invalid_argument("VolumeFractions: each component must lie in [0,1]");
    if (std::abs(theta_.sum() - 1.0) > tol)
        throw std::invalid_argument("VolumeFractions: components must sum to 1");
}

VolumeFractions VolumeFractions::pure(PhaseIndex i) {
    Vec4 t = Vec4::Zero();
    t[i.value()] = 1.0;
    return VolumeFractions(t);
}

Vec3 diagonal_gradient_from_fractions(const VolumeFractions& theta) {
    Vec3 g;
    for (int i = 0; i < 3; ++i) g[i] = -3.0 * theta[i + 1] - theta[0] + 1.0;
    return g;
}

}  // namespace twinlab
