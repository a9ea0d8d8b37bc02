#include "twinlab/hmeasure.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include <fftw3.h>

namespace twinlab {

namespace {

double bump01(double t) {
    // 1 at t = 0, support |t| < 1
    const double t2 = t * t;
    if (t2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t2));
}

}  // namespace

double Window::psi_grid(const Vec3& g) const {
    double v = 1.0;
    for (int a = 0; a < 3; ++a) {
        const double half = 0.5 * (box.hi[a] - box.lo[a]);
        if (half <= 0.0) return 0.0;
        const double c = 0.5 * (box.hi[a] + box.lo[a]);
        v *= bump01((g[a] - c) / (cutoff * half));
        if (v == 0.0) return 0.0;
    }
    return v;
}

ScalarField oscillation_field(const Microstructure& ms,
                              const std::function<Mat3(const Vec3&)>& limit_gradient,
                              int component) {
    if (component < 1 || component > 3)
        throw std::invalid_argument("oscillation_field: component in {1,2,3}");
    if (!ms.u.has_analytic_gradient())
        throw std::invalid_argument("oscillation_field: analytic gradient required");
    const int c = component - 1;
    const BoxDomain& d = ms.domain();
    return ScalarField::from_function(d, [&](const Vec3& x) {
        return ms.u.gradient_sample(x)(c, c) - limit_gradient(x)(c, c);
    });
}

int fine_bin_of_direction(const Vec3& dir_in) {
    // canonical representative with nonnegative z (then y, then x)
    Vec3 dir = dir_in;
    if (dir[2] < 0.0 || (dir[2] == 0.0 && (dir[1] < 0.0 || (dir[1] == 0.0 && dir[0] < 0.0))))
        dir = -dir;
    const int rings = 13, per_ring = 24;
    int ring = std::min(rings - 1, static_cast<int>(dir[2] * rings));
    double phi = std::atan2(dir[1], dir[0]);
    if (phi < 0.0) phi += 2.0 * M_PI;
    int sector = std::min(per_ring - 1, static_cast<int>(phi / (2.0 * M_PI) * per_ring));
    return ring * per_ring + sector;
}

namespace {

struct SubGrid {
    std::array<int, 3> lo{};   // first cell index per axis
    std::array<int, 3> n{};    // cells per axis
    std::size_t count() const {
        return static_cast<std::size_t>(n[0]) * n[1] * n[2];
    }
};

SubGrid window_subgrid(const BoxDomain& dom, const Window& win) {
    const Vec3 sp = dom.spacing();
    const auto& nr = dom.resolution();
    SubGrid sg;
    for (int a = 0; a < 3; ++a) {
        if (win.box.lo[a] <= 0.0 || win.box.hi[a] >= dom.extent()[a])
            throw std::invalid_argument("angular_spectrum: window support touches the boundary");
        sg.lo[a] = std::max(0, static_cast<int>(std::floor(win.box.lo[a] / sp[a])));
        int hi = std::min(nr[a] - 1, static_cast<int>(std::ceil(win.box.hi[a] / sp[a])));
        sg.n[a] = hi - sg.lo[a] + 1;
    }
    return sg;
}

// squared DFT amplitudes of the discrete mollifier kernel on the sub-grid
std::vector<double> kernel_damping(const BoxDomain& dom, const SubGrid& sg, double radius) {
    const Vec3 sp = dom.spacing();
    BoxDomain sub(Vec3::Zero(),
                  Vec3(sg.n[0] * sp[0], sg.n[1] * sp[1], sg.n[2] * sp[2]),
                  {sg.n[0], sg.n[1], sg.n[2]}, Mat3::Identity());
    const auto kernel = mollifier_kernel_grid(sub, radius);

    const std::size_t m = sub.cell_count();
    fftw_complex* in = fftw_alloc_complex(m);
    fftw_complex* out = fftw_alloc_complex(m);
    for (std::size_t c = 0; c < m; ++c) {
        in[c][0] = kernel[c];
        in[c][1] = 0.0;
    }
    fftw_plan plan = fftw_plan_dft_3d(sg.n[0], sg.n[1], sg.n[2], in, out, FFTW_FORWARD,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    std::vector<double> damp(m);
    for (std::size_t c = 0; c < m; ++c) damp[c] = out[c][0] * out[c][0] + out[c][1] * out[c][1];
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
    return damp;
}

}  // namespace

AngularSpectrum angular_spectrum_of_field(const ScalarField& osc, const Window& win,
                                          double delta, double eta, int component) {
    const BoxDomain& dom = osc.domain();
    const SubGrid sg = window_subgrid(dom, win);
    const Vec3 sp = dom.spacing();

    AngularSpectrum spec;
    spec.component = component;
    spec.delta = delta;
    spec.fine_mass.assign(kFineBins, 0.0);

    const std::size_t m = sg.count();
    fftw_complex* in = fftw_alloc_complex(m);
    fftw_complex* out = fftw_alloc_complex(m);

    // windowed field on the sub-grid
    double psi2 = 0.0, wen = 0.0;
    const double vol = dom.cell_volume();
    std::size_t c = 0;
    for (int i = 0; i < sg.n[0]; ++i)
        for (int j = 0; j < sg.n[1]; ++j)
            for (int k = 0; k < sg.n[2]; ++k, ++c) {
                const Vec3 g = dom.grid_point(sg.lo[0] + i, sg.lo[1] + j, sg.lo[2] + k);
                const double psi = win.psi_grid(g);
                const double w = psi * osc.at(sg.lo[0] + i, sg.lo[1] + j, sg.lo[2] + k);
                in[c][0] = w;
                in[c][1] = 0.0;
                psi2 += psi * psi;
                wen += w * w;
            }
    spec.psi2_integral = psi2 * vol;
    spec.windowed_energy = wen * vol;

    fftw_plan plan = fftw_plan_dft_3d(sg.n[0], sg.n[1], sg.n[2], in, out, FFTW_FORWARD,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);

    std::vector<double> damp;
    if (delta > 0.0) damp = kernel_damping(dom, sg, delta * std::cbrt(eta));

    const double mass_scale = vol / static_cast<double>(m);
    const double cos_cone = std::cos(spec.cone_half_angle_deg * M_PI / 180.0);
    const auto& normals = all_twin_normals();
    const Mat3 frame_t = dom.frame().transpose();

    c = 0;
    for (int i = 0; i < sg.n[0]; ++i)
        for (int j = 0; j < sg.n[1]; ++j)
            for (int k = 0; k < sg.n[2]; ++k, ++c) {
                double mass = (out[c][0] * out[c][0] + out[c][1] * out[c][1]) * mass_scale;
                if (delta > 0.0) mass *= damp[c];
                const int kk[3] = {i, j, k};
                Vec3 freq;
                bool dc = true;
                for (int a = 0; a < 3; ++a) {
                    int f = kk[a];
                    if (f > sg.n[a] / 2) f -= sg.n[a];
                    if (f != 0) dc = false;
                    freq[a] = f / (sg.n[a] * sp[a]);
                }
                if (dc) {
                    spec.dc_mass += mass;
                    continue;
                }
                const Vec3 dir = (frame_t * freq).normalized();
                int cls = -1;
                for (int b = 0; b < 6; ++b)
                    if (std::abs(dir.dot(normals[static_cast<std::size_t>(b)].components)) >=
                        cos_cone) {
                        cls = b;
                        break;
                    }
                if (cls >= 0) spec.cone_mass[static_cast<std::size_t>(cls)] += mass;
                else spec.other_mass += mass;
                spec.fine_mass[static_cast<std::size_t>(fine_bin_of_direction(dir))] += mass;
            }

    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
    return spec;
}

AngularSpectrum angular_spectrum(const EtaSequence& seq, int component, const Window& window,
                                 double delta) {
    if (seq.members.size() < 2)
        throw std::invalid_argument("angular_spectrum: needs at least two members");
    const auto& fine = seq.finest();
    const auto& next = seq.next_finest();
    const ScalarField osc_f = oscillation_field(fine, seq.limit_gradient, component);
    const ScalarField osc_n = oscillation_field(next, seq.limit_gradient, component);
    AngularSpectrum sf = angular_spectrum_of_field(osc_f, window, delta, fine.eta, component);
    AngularSpectrum sn = angular_spectrum_of_field(osc_n, window, delta, next.eta, component);
    double num = 0.0;
    for (int b = 0; b < 6; ++b)
        num = std::max(num, std::abs(sf.cone_mass[static_cast<std::size_t>(b)] -
                                     sn.cone_mass[static_cast<std::size_t>(b)]));
    const double den = std::max(sf.total_directional(), 1e-300);
    sf.richardson_rel_change = num / den;
    return sf;
}

MassIdentityReport mass_identity_check(const std::function<Vec4(const Vec3&)>& theta,
                                       const AngularSpectrum& spectrum, const Window& window,
                                       const BoxDomain& domain, int component) {
    const auto& n = domain.resolution();
    double predicted = 0.0;
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                const Vec3 g = domain.grid_point(i, j, k);
                const double psi = window.psi_grid(g);
                if (psi == 0.0) continue;
                const Vec4 th = theta(domain.lab_from_grid(g));
                const double ti = th[component];
                const double t0 = th[0];
                predicted += psi * psi *
                             (18.0 * ti * (1.0 - ti) - 12.0 * t0 * ti + 2.0 * t0 * (1.0 - t0));
            }
    predicted *= domain.cell_volume();

    MassIdentityReport rep;
    rep.measured = 2.0 * spectrum.total_directional();
    rep.predicted = predicted;
    rep.rel_deviation = (predicted != 0.0)
                            ? std::abs(rep.measured - predicted) / std::abs(predicted)
                            : std::abs(rep.measured);
    return rep;
}

std::vector<WindowDominance> single_direction_check(const ScalarField& osc, double eta,
                                                    const std::array<int, 3>& tiles,
                                                    double flag_ratio, double mass_floor_rel) {
    const BoxDomain& dom = osc.domain();
    std::vector<WindowDominance> out;
    std::vector<AngularSpectrum> spectra;

    double max_energy = 0.0;
    for (int ti = 0; ti < tiles[0]; ++ti)
        for (int tj = 0; tj < tiles[1]; ++tj)
            for (int tk = 0; tk < tiles[2]; ++tk) {
                Window win;
                const int t[3] = {ti, tj, tk};
                bool degenerate = false;
                for (int a = 0; a < 3; ++a) {
                    const double w = dom.extent()[a] / tiles[a];
                    win.box.lo[a] = t[a] * w;
                    win.box.hi[a] = (t[a] + 1) * w;
                    // interior clip so the support stays away from the boundary
                    win.box.lo[a] = std::max(win.box.lo[a], 1e-9 * dom.extent()[a]);
                    win.box.hi[a] = std::min(win.box.hi[a], (1.0 - 1e-9) * dom.extent()[a]);
                    if (win.box.hi[a] <= win.box.lo[a]) degenerate = true;
                }
                if (degenerate) continue;
                AngularSpectrum s = angular_spectrum_of_field(osc, win, 0.0, eta, 1);
                max_energy = std::max(max_energy, s.windowed_energy);
                WindowDominance wd;
                wd.center_grid = 0.5 * (win.box.lo + win.box.hi);
                spectra.push_back(std::move(s));
                out.push_back(wd);
            }

    for (std::size_t w = 0; w < out.size(); ++w) {
        const auto& s = spectra[w];
        auto& wd = out[w];
        for (int b = 0; b < 6; ++b) {
            const double mass = s.cone_mass[static_cast<std::size_t>(b)];
            if (mass > wd.top_mass) {
                wd.second_mass = wd.top_mass;
                wd.second_class = wd.top_class;
                wd.top_mass = mass;
                wd.top_class = b;
            } else if (mass > wd.second_mass) {
                wd.second_mass = mass;
                wd.second_class = b;
            }
        }
        const bool has_mass = s.windowed_energy > mass_floor_rel * max_energy;
        wd.flagged = has_mass && wd.second_mass > flag_ratio * wd.top_mass;
    }
    return out;
}

std::vector<MollifiedMassReport> mollified_mass_bounds(const EtaSequence& seq, int component,
                                                       const Window& window,
                                                       const std::vector<double>& deltas) {
    const auto& fine = seq.finest();
    const BoxDomain& dom = fine.domain();
    const ScalarField osc = oscillation_field(fine, seq.limit_gradient, component);

    // window averages of the limit density and the interfacial energy density
    const auto& n = dom.resolution();
    const auto inter = interfacial_energy(fine);
    double psi2 = 0.0, weighted_theta = 0.0, weighted_inter = 0.0;
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k) {
                const Vec3 g = dom.grid_point(i, j, k);
                const double p2 = window.psi_grid(g) * window.psi_grid(g);
                if (p2 == 0.0) continue;
                psi2 += p2;
                const double ti = seq.theta(dom.lab_from_grid(g))[component];
                weighted_theta += p2 * 18.0 * ti * (1.0 - ti);
                weighted_inter += p2 * inter.second.at(i, j, k);
            }
    const double upper = weighted_theta / psi2;
    const double inter_avg = weighted_inter / psi2;

    std::vector<MollifiedMassReport> out;
    for (double delta : deltas) {
        AngularSpectrum s = angular_spectrum_of_field(osc, window, delta, fine.eta, component);
        MollifiedMassReport rep;
        rep.delta = delta;
        rep.tau = 2.0 * s.total_directional() / s.psi2_integral;
        rep.upper = upper;
        rep.lower = upper - 36.0 * delta * inter_avg;
        out.push_back(rep);
    }
    return out;
}

WaveSupportReport wave_support_check(const EtaSequence& seq, int component,
                                     const Window& window) {
    WaveSupportReport rep;
    const auto adm = admissible_normals(PhaseIndex(component));
    std::array<bool, 6> admissible{};
    const auto& normals = all_twin_normals();
    for (int b = 0; b < 6; ++b)
        for (const auto& nu : adm)
            if (normals[static_cast<std::size_t>(b)].pair_index == nu.pair_index &&
                normals[static_cast<std::size_t>(b)].sign == nu.sign)
                admissible[static_cast<std::size_t>(b)] = true;

    for (const auto& ms : seq.members) {
        const ScalarField osc = oscillation_field(ms, seq.limit_gradient, component);
        const AngularSpectrum s = angular_spectrum_of_field(osc, window, 0.0, ms.eta, component);
        const double total = s.total_directional();
        if (total <= 1e-300) {
            rep.has_mass = false;
            rep.off_support_fraction.push_back(0.0);
            continue;
        }
        double in_cone = 0.0;
        for (int b = 0; b < 6; ++b)
            if (admissible[static_cast<std::size_t>(b)])
                in_cone += s.cone_mass[static_cast<std::size_t>(b)];
        rep.off_support_fraction.push_back((total - in_cone) / total);
    }
    return rep;
}

std::vector<TransportSample> transport_ratio(const EtaSequence& seq, int component,
                                             int normal_class, const Vec3& d, double delta,
                                             const Window& window_template, int n_centers,
                                             double center_span) {
    if (normal_class < 0 || normal_class > 5)
        throw std::invalid_argument("transport_ratio: class index in 0..5");
    const Vec3 nu = all_twin_normals()[static_cast<std::size_t>(normal_class)].components;
    if (std::abs(d.normalized().dot(nu)) > 1e-9)
        throw std::invalid_argument("transport_ratio: direction must be orthogonal to the class normal");
    if (delta <= 0.0) throw std::invalid_argument("transport_ratio: delta must be positive");
    if (n_centers < 2) throw std::invalid_argument("transport_ratio: needs >= 2 centers");

    const auto& fine = seq.finest();
    const BoxDomain& dom = fine.domain();
    const ScalarField osc = oscillation_field(fine, seq.limit_gradient, component);
    const auto elastic = elastic_energy(fine);

    // window centers shifted along d (grid displacement of the box)
    const Vec3 dir = d.normalized();
    const Vec3 step_grid = dom.frame() * dir * (center_span / (n_centers - 1));
    const double step_len = center_span / (n_centers - 1);

    std::vector<double> masses(static_cast<std::size_t>(n_centers), 0.0);
    std::vector<double> elmean(static_cast<std::size_t>(n_centers), 0.0);
    std::vector<double> pos(static_cast<std::size_t>(n_centers), 0.0);
    for (int m = 0; m < n_centers; ++m) {
        Window win = window_template;
        const Vec3 shift = step_grid * m;
        win.box.lo += shift;
        win.box.hi += shift;
        AngularSpectrum s = angular_spectrum_of_field(osc, win, delta, fine.eta, component);
        masses[static_cast<std::size_t>(m)] =
            2.0 * s.cone_mass[static_cast<std::size_t>(normal_class)] / s.psi2_integral;
        pos[static_cast<std::size_t>(m)] = m * step_len;

        // window-averaged elastic density
        const auto& n = dom.resolution();
        double psi2 = 0.0, we = 0.0;
        for (int i = 0; i < n[0]; ++i)
            for (int j = 0; j < n[1]; ++j)
                for (int k = 0; k < n[2]; ++k) {
                    const double p = win.psi_grid(dom.grid_point(i, j, k));
                    if (p == 0.0) continue;
                    psi2 += p * p;
                    we += p * p * elastic.second.at(i, j, k);
                }
        elmean[static_cast<std::size_t>(m)] = we / psi2;
    }

    std::vector<TransportSample> out;
    for (int m = 0; m + 1 < n_centers; ++m) {
        TransportSample ts;
        ts.position = 0.5 * (pos[m] + pos[m + 1]);
        ts.class_density = 0.5 * (masses[m] + masses[m + 1]);
        ts.derivative = std::abs(masses[m + 1] - masses[m]) / step_len;
        const double el = 0.5 * (elmean[m] + elmean[m + 1]);
        ts.bound = (1.0 / delta) * std::sqrt(std::max(ts.class_density, 0.0)) *
                   std::sqrt(std::max(el, 0.0));
        ts.ratio = (ts.bound > 0.0) ? ts.derivative / ts.bound : 0.0;
        out.push_back(ts);
    }
    return out;
}

}  // namespace twinlab
