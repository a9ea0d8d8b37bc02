#include "twinlab/energy.hpp"

#include <cmath>

namespace twinlab {

Microstructure::Microstructure(DisplacementField u_, PartitionField chi_, double eta_)
    : u(std::move(u_)), chi(std::move(chi_)), eta(eta_) {
    if (!u.domain().same_geometry(chi.domain()))
        throw std::invalid_argument("Microstructure: u and chi must share one domain");
    if (eta <= 0.0) throw std::invalid_argument("Microstructure: eta must be positive");
}

std::pair<double, ScalarField> elastic_energy(const Microstructure& ms) {
    const BoxDomain& d = ms.domain();
    const auto& n = d.resolution();
    const double weight = std::pow(ms.eta, -2.0 / 3.0);

    const SymmetricTensorField strain = symmetric_gradient(ms.u);
    static const SymmetricTensor3 wells[4] = {
        well_strain(PhaseIndex(0)), well_strain(PhaseIndex(1)),
        well_strain(PhaseIndex(2)), well_strain(PhaseIndex(3))};

    ScalarField density(d, 0.0);
    double total = 0.0;
    const double vol = d.cell_volume();
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                const SymmetricTensor3 misfit = strain.at(i, j, k) - wells[ms.chi.at(i, j, k)];
                const double rho = weight * misfit.squared_norm();
                density.at(i, j, k) = rho;
                total += rho * vol;
            }
    return {total, std::move(density)};
}

std::pair<double, ScalarField> interfacial_energy(const Microstructure& ms,
                                                  const EnergyOptions& opts) {
    const BoxDomain& d = ms.domain();
    const auto& n = d.resolution();
    const Vec3 h = d.spacing();
    const double area[3] = {h[1] * h[2], h[0] * h[2], h[0] * h[1]};
    const double weight = std::pow(ms.eta, 1.0 / 3.0);
    const double vol = d.cell_volume();

    ScalarField density(d, 0.0);
    double total = 0.0;
    const auto& chi = ms.chi;
    // A face between two distinct labels contributes to |D chi_a| and
    // |D chi_b|, i.e. twice, unless one side is austenite and the austenite
    // indicator is excluded from the sum.
    auto face_weight = [&](uint8_t a, uint8_t b) -> double {
        if (a == b) return 0.0;
        double w = 0.0;
        if (a != 0 || opts.include_austenite_interfaces) w += 1.0;
        if (b != 0 || opts.include_austenite_interfaces) w += 1.0;
        return w;
    };

    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                const uint8_t c = chi.at(i, j, k);
                const int idx[3] = {i, j, k};
                for (int a = 0; a < 3; ++a) {
                    if (idx[a] + 1 >= n[a]) continue;
                    int jdx[3] = {i, j, k};
                    jdx[a] += 1;
                    const uint8_t cn = chi.at(jdx[0], jdx[1], jdx[2]);
                    const double w = face_weight(c, cn);
                    if (w == 0.0) continue;
                    const double contrib = weight * w * area[a];
                    total += contrib;
                    // half of the face energy to each adjacent cell
                    density.at(i, j, k) += 0.5 * contrib / vol;
                    density.at(jdx[0], jdx[1], jdx[2]) += 0.5 * contrib / vol;
                }
            }
    return {total, std::move(density)};
}

EnergyBreakdown total_energy(const Microstructure& ms, const EnergyOptions& opts) {
    auto [ee, ed] = elastic_energy(ms);
    auto [ie, id] = interfacial_energy(ms, opts);
    EnergyBreakdown out{ee, ie, ee + ie, ms.eta, std::move(ed), std::move(id)};
    return out;
}

Microstructure rescale(const Microstructure& ms, double r) {
    if (r <= 0.0) throw std::invalid_argument("rescale: r must be positive");
    const BoxDomain& d = ms.domain();
    const Vec3 new_origin = d.origin() / r;
    const Vec3 new_extent = d.extent() / r;
    for (int a = 0; a < 3; ++a)
        if (!(new_extent[a] > 0.0) || !std::isfinite(new_extent[a]))
            throw std::invalid_argument("rescale: degenerate rescaled domain");
    const BoxDomain nd(new_origin, new_extent, d.resolution(), d.frame());

    // u_hat(x_hat) = u(r x_hat) / r; D u_hat(x_hat) = D u(r x_hat).
    DisplacementField nu = [&] {
        if (ms.u.has_analytic_sampler() && ms.u.has_analytic_gradient()) {
            auto us = ms.u.sampler();
            auto gs = ms.u.gradient_sampler();
            return DisplacementField(
                nd, [us, r](const Vec3& x) { return us(r * x) / r; },
                [gs, r](const Vec3& x) { return gs(r * x); });
        }
        DisplacementField f(nd);
        const auto& n = nd.resolution();
        for (int i = 0; i < n[0]; ++i)
            for (int j = 0; j < n[1]; ++j)
                for (int k = 0; k < n[2]; ++k)
                    f.set_value(i, j, k, ms.u.value_at(i, j, k) / r);
        return f;
    }();

    // Cell centers map exactly, so labels carry over unchanged.
    PartitionField nchi(nd);
    const auto& n = nd.resolution();
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) nchi.at(i, j, k) = ms.chi.at(i, j, k);

    Microstructure out(std::move(nu), std::move(nchi), ms.eta / r);
    if (ms.phase_sampler) {
        auto ps = ms.phase_sampler;
        out.phase_sampler = [ps, r](const Vec3& x) { return ps(r * x); };
    }
    return out;
}

}  // namespace twinlab
