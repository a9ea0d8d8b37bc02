#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace twinlab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec4 = Eigen::Vector4d;

/// Symmetric 3x3 strain tensor. Only the six independent entries are stored,
/// so symmetry holds by construction.
class SymmetricTensor3 {
public:
    SymmetricTensor3() : c_{} {}
    SymmetricTensor3(double xx, double yy, double zz, double yz, double xz, double xy)
        : c_{xx, yy, zz, yz, xz, xy} {}

    static SymmetricTensor3 zero() { return {}; }
    static SymmetricTensor3 diagonal(double a, double b, double c) { return {a, b, c, 0.0, 0.0, 0.0}; }

    // Symmetric part of an arbitrary matrix.
    static SymmetricTensor3 symmetric_part(const Mat3& m);

    // Requires m symmetric to `tol`; throws otherwise.
    static SymmetricTensor3 from_matrix(const Mat3& m, double tol = 1e-12);

    // Symmetrized outer product a (.) b = (a b^T + b a^T)/2.
    static SymmetricTensor3 sym_outer(const Vec3& a, const Vec3& b);

    double operator()(int i, int j) const;
    Mat3 to_matrix() const;

    double trace() const { return c_[0] + c_[1] + c_[2]; }
    double squared_norm() const;
    double norm() const;

    SymmetricTensor3 operator+(const SymmetricTensor3& o) const;
    SymmetricTensor3 operator-(const SymmetricTensor3& o) const;
    SymmetricTensor3 operator*(double s) const;

    // Max absolute entrywise difference.
    double max_abs_diff(const SymmetricTensor3& o) const;

private:
    // xx, yy, zz, yz, xz, xy
    std::array<double, 6> c_;
};

inline SymmetricTensor3 operator*(double s, const SymmetricTensor3& t) { return t * s; }

/// Phase label: 0 is the cubic reference phase, 1..3 the tetragonal variants.
/// The variant indices cycle 1 -> 2 -> 3 -> 1; index 0 never takes part in the
/// cycling.
class PhaseIndex {
public:
    explicit PhaseIndex(int v) : v_(v) {
        if (v < 0 || v > 3) throw std::invalid_argument("PhaseIndex: value must be in {0,1,2,3}");
    }
    int value() const { return v_; }
    bool is_austenite() const { return v_ == 0; }
    bool is_martensite() const { return v_ != 0; }

    // Cyclic successor/predecessor among the martensite variants.
    PhaseIndex next() const {
        require_martensite();
        return PhaseIndex(v_ == 3 ? 1 : v_ + 1);
    }
    PhaseIndex prev() const {
        require_martensite();
        return PhaseIndex(v_ == 1 ? 3 : v_ - 1);
    }

    bool operator==(const PhaseIndex& o) const { return v_ == o.v_; }
    bool operator!=(const PhaseIndex& o) const { return v_ != o.v_; }

private:
    void require_martensite() const {
        if (v_ == 0) throw std::invalid_argument("PhaseIndex: austenite does not cycle");
    }
    int v_;
};

/// One of the six (110)-type twin normals, organized in three pairs.
struct TwinNormal {
    int pair_index = 1;  // 1, 2 or 3
    int sign = +1;       // +1 or -1
    Vec3 components = Vec3::Zero();  // unit vector

    // The other member of the same pair. Normals within a pair are orthogonal.
    TwinNormal conjugate() const;

    // Projective identification nu ~ -nu.
    bool same_class(const TwinNormal& o, double tol = 1e-12) const;
    bool same_class(const Vec3& dir, double tol = 1e-12) const;
};

/// Volume fractions theta_0..theta_3 of the four phases.
class VolumeFractions {
public:
    explicit VolumeFractions(const Vec4& theta, double tol = 1e-12);
    static VolumeFractions pure(PhaseIndex i);

    double operator[](int i) const { return theta_[i]; }
    const Vec4& values() const { return theta_; }

private:
    Vec4 theta_;
};

// --- well and normal tables -------------------------------------------------

/// Stress-free strain of phase i. The variants are diagonal and trace-free;
/// the reference phase has zero strain.
SymmetricTensor3 well_strain(PhaseIndex i);

/// Twin normal nu_k^{+/-}, k in {1,2,3}, sign in {+1,-1}.
const TwinNormal& twin_normal(int pair_index, int sign);

/// All six normals in a fixed order: (1,+),(1,-),(2,+),(2,-),(3,+),(3,-).
const std::array<TwinNormal, 6>& all_twin_normals();

/// Result of the rank-one decomposition of a well difference.
struct RankOneDecomposition {
    TwinNormal nu_plus;
    TwinNormal nu_minus;
    double scale = 0.0;  // e_j - e_i = scale * nu_plus (.) nu_minus
};

/// Decompose e_j - e_i as scale * nu+ (.) nu- with both normals from the pair
/// N_k, k not in {i,j}. Reversed pairs return the same normals with negative
/// scale, so the normal classes stay canonical per pair.
RankOneDecomposition rank_one_decompose(PhaseIndex i, PhaseIndex j);

/// The four normals in N_{i+1} union N_{i-1} (cyclic), i.e. the directions a
/// variant-i strain component may oscillate along.
std::array<TwinNormal, 4> admissible_normals(PhaseIndex i);

/// Diagonal of the limiting displacement gradient for given volume fractions:
/// d_i u_i = -3 theta_i - theta_0 + 1.
Vec3 diagonal_gradient_from_fractions(const VolumeFractions& theta);

}  // namespace twinlab
