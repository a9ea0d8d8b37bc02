#include "twinlab/experiment.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "twinlab/besov.hpp"
#include "twinlab/hmeasure.hpp"
#include "twinlab/scaling.hpp"

namespace twinlab {

using nlohmann::json;
namespace fs = std::filesystem;

std::string tool_version() { return "twinlab 0.1.0"; }

namespace {

ExperimentKind kind_from_string(const std::string& s) {
    if (s == "laminate") return ExperimentKind::Laminate;
    if (s == "checkerboard") return ExperimentKind::Checkerboard;
    if (s == "branch") return ExperimentKind::Branch;
    if (s == "cluster") return ExperimentKind::Cluster;
    throw ConfigError("unknown experiment kind: " + s);
}

std::string kind_to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Laminate: return "laminate";
        case ExperimentKind::Checkerboard: return "checkerboard";
        case ExperimentKind::Branch: return "branch";
        default: return "cluster";
    }
}

json spec_json(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
        case ExperimentKind::Laminate: return to_json(cfg.laminate);
        case ExperimentKind::Checkerboard: return to_json(cfg.board);
        case ExperimentKind::Branch: return to_json(cfg.branch);
        default: return to_json(cfg.cluster);
    }
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.kind = kind_from_string(j.at("kind").get<std::string>());
        const json& spec = j.at("spec");
        switch (cfg.kind) {
            case ExperimentKind::Laminate: cfg.laminate = laminate_spec_from_json(spec); break;
            case ExperimentKind::Checkerboard: cfg.board = checkerboard_spec_from_json(spec); break;
            case ExperimentKind::Branch: cfg.branch = branch_spec_from_json(spec); break;
            case ExperimentKind::Cluster: cfg.cluster = cluster_spec_from_json(spec); break;
        }
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            cfg.grid = {g.at(0).get<int>(), g.at(1).get<int>(), g.at(2).get<int>()};
        }
        cfg.eta = j.value("eta", cfg.eta);
        cfg.eta_count = j.value("eta_count", cfg.eta_count);
        if (j.contains("analyses")) {
            const auto& a = j.at("analyses");
            cfg.analyses.energy = a.value("energy", true);
            cfg.analyses.besov = a.value("besov", false);
            cfg.analyses.hmeasure = a.value("hmeasure", false);
            cfg.analyses.scaling = a.value("scaling", false);
        }
        cfg.output_dir = j.value("output_dir", cfg.output_dir);
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }
    if (const char* env = std::getenv("TWINLAB_OUTPUT_DIR")) cfg.output_dir = env;

    json canonical{{"kind", kind_to_string(cfg.kind)},
                   {"spec", spec_json(cfg)},
                   {"grid", cfg.grid},
                   {"eta", cfg.eta},
                   {"eta_count", cfg.eta_count},
                   {"analyses",
                    {{"energy", cfg.analyses.energy},
                     {"besov", cfg.analyses.besov},
                     {"hmeasure", cfg.analyses.hmeasure},
                     {"scaling", cfg.analyses.scaling}}},
                   {"seed", cfg.seed}};
    cfg.canonical = canonical.dump();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

std::string config_digest(const ExperimentConfig& cfg) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(cfg.canonical)));
    return buf;
}

std::vector<std::string> verify_config(const ExperimentConfig& cfg) {
    std::vector<std::string> v;
    for (int a = 0; a < 3; ++a)
        if (cfg.grid[a] < 2) v.push_back("grid: resolution must be >= 2 per axis");
    if (cfg.eta <= 0.0) v.push_back("eta must be positive");
    if (cfg.eta_count < 1) v.push_back("eta_count must be >= 1");

    switch (cfg.kind) {
        case ExperimentKind::Laminate: {
            const auto& s = cfg.laminate;
            if (s.fraction <= 0.0 || s.fraction >= 1.0)
                v.push_back("laminate: fraction must lie in (0,1)");
            if (s.variant_i == s.variant_j || s.variant_i < 1 || s.variant_i > 3 ||
                s.variant_j < 1 || s.variant_j > 3)
                v.push_back("laminate: variants must be two distinct indices in {1,2,3}");
            else if (s.normal.pair_index != 6 - s.variant_i - s.variant_j)
                v.push_back("laminate: normal must belong to the conjugate pair of the variants");
            if (s.period <= 0.0) v.push_back("laminate: period must be positive");
            else if (s.period * std::cbrt(std::pow(2.0, -(cfg.eta_count - 1))) <
                     4.0 / cfg.grid[0])
                v.push_back("laminate: finest period in the sweep falls under 4 cells");
            break;
        }
        case ExperimentKind::Checkerboard: {
            const auto& s = cfg.board;
            if (std::abs(s.a + s.b - 1.0) > 1e-12 || s.a < 0.0 || s.b < 0.0)
                v.push_back("checkerboard: needs a, b >= 0 with a + b = 1");
            if (s.a <= 0.0 || s.b <= 0.0)
                v.push_back("checkerboard: hypothesis requires a > 0 and b > 0");
            if (s.variant_i < 1 || s.variant_i > 3)
                v.push_back("checkerboard: variant index in {1,2,3}");
            else {
                const PhaseIndex i(s.variant_i);
                if (s.nu_next.pair_index != i.next().value())
                    v.push_back("checkerboard: nu_next must lie in N_{i+1}");
                if (s.nu_prev.pair_index != i.prev().value())
                    v.push_back("checkerboard: nu_prev must lie in N_{i-1}");
            }
            break;
        }
        case ExperimentKind::Branch: {
            const auto& s = cfg.branch;
            if (s.depth < 1) v.push_back("branch: depth must be >= 1");
            if (s.period_ratio <= 0.0 || s.period_ratio >= 1.0)
                v.push_back("branch: period_ratio must lie in (0,1)");
            if (s.layer_thickness_ratio <= 0.0 || s.layer_thickness_ratio >= 1.0)
                v.push_back("branch: layer_thickness_ratio must lie in (0,1)");
            if (s.tower_height <= 0.0 || s.tower_height > 1.0)
                v.push_back("branch: tower must fit inside the unit slab");
            if (s.twin_normal.pair_index != 3) v.push_back("branch: twin normal must lie in N_3");
            if (s.habit_normal.pair_index != 1) v.push_back("branch: habit normal must lie in N_1");
            const double p_finest = s.base_period * std::pow(s.period_ratio, s.depth);
            if (p_finest < 4.0 / cfg.grid[0])
                v.push_back("branch: depth too large for resolution (period under 4 cells)");
            break;
        }
        case ExperimentKind::Cluster: {
            const auto& s = cfg.cluster;
            if (s.epsilon <= 0.0 || s.epsilon >= 2.0 / 3.0)
                v.push_back("cluster: epsilon must lie in (0, 2/3)");
            if (s.generations < 1) v.push_back("cluster: generations must be >= 1");
            bool is_normal = false;
            for (const auto& nu : all_twin_normals())
                if (nu.same_class(s.transversal_direction, 1e-10)) is_normal = true;
            if (!is_normal)
                v.push_back("cluster: transversal direction must be a twin normal");
            else {
                // smallest Cantor gap after `generations` steps
                const double lambda = s.cantor_ratio();
                const double smallest = 0.9 * std::pow(lambda, s.generations);
                if (smallest < 2.0 / cfg.grid[0])
                    v.push_back("cluster: generations produce sub-cell gaps");
            }
            break;
        }
    }

    if (cfg.analyses.besov) {
        // margin feasibility for the dyadic h set (factor 4, interior box at 20%)
        const double diam = std::sqrt(3.0) * 0.6;
        if (4.0 * diam * std::pow(2.0, -8) > 0.2)
            v.push_back("besov: no dyadic h satisfies the margin condition");
    }
    return v;
}

namespace {

struct Outputs {
    std::vector<std::string> files;
    fs::path dir;
    void note(const std::string& name) { files.push_back(name); }
};

void write_json(const fs::path& p, const json& j) {
    std::ofstream f(p, std::ios::binary);
    f << j.dump(2) << "\n";
}

void run_energy(const ExperimentConfig& cfg, const BoxDomain& domain, Outputs& out) {
    CsvWriter sweep("energy", {"eta", "elastic", "interfacial", "total"});
    json last;
    for (int m = 0; m < cfg.eta_count; ++m) {
        const double eta = cfg.eta * std::pow(2.0, -m);
        Microstructure ms = [&]() -> Microstructure {
            switch (cfg.kind) {
                case ExperimentKind::Laminate: {
                    LaminateSpec s = cfg.laminate;
                    s.period = cfg.laminate.period * std::cbrt(eta / cfg.eta);
                    return simple_laminate(s, domain, eta).ms;
                }
                case ExperimentKind::Branch:
                    return branched_habit_plane(cfg.branch, domain, eta).ms;
                case ExperimentKind::Cluster:
                    return clustering_laminate(cfg.cluster, domain, eta).ms;
                default:
                    throw ConfigError("energy analysis needs a displacement-bearing construction");
            }
        }();
        const EnergyBreakdown e = total_energy(ms);
        sweep.add_row({e.eta, e.elastic, e.interfacial, e.total});
        last = json{{"eta", e.eta},
                    {"elastic", e.elastic},
                    {"interfacial", e.interfacial},
                    {"total", e.total}};
    }
    sweep.write((out.dir / "energy.csv").string());
    out.note("energy.csv");
    write_json(out.dir / "energy.json", last);
    out.note("energy.json");
}

void run_besov(const ExperimentConfig& cfg, const BoxDomain& domain, Outputs& out) {
    // representative indicator: variant-1 of the construction at the base eta
    ScalarField chi = [&]() -> ScalarField {
        switch (cfg.kind) {
            case ExperimentKind::Laminate:
                return simple_laminate(cfg.laminate, domain, cfg.eta)
                    .ms.chi.indicator(PhaseIndex(1));
            case ExperimentKind::Branch:
                return branched_habit_plane(cfg.branch, domain, cfg.eta)
                    .ms.chi.indicator(PhaseIndex(1));
            case ExperimentKind::Cluster:
                return clustering_laminate(cfg.cluster, domain, cfg.eta).coarse_indicator;
            case ExperimentKind::Checkerboard:
                return checkerboard(cfg.board, domain).regions[0];
        }
        throw ConfigError("unreachable");
    }();

    SubBox U;
    for (int a = 0; a < 3; ++a) {
        U.lo[a] = 0.25 * domain.extent()[a];
        U.hi[a] = 0.75 * domain.extent()[a];
    }
    const auto h_set = dyadic_h_set(U, domain);
    if (h_set.size() < 2) throw ConfigError("besov: margin leaves fewer than 2 h values");
    const auto design = default_direction_design(domain);
    const BesovReport rep = besov_seminorm(chi, U, h_set, design);

    // comparator energies (densities of the base-eta microstructure)
    double epsilon = 1.0;
    ScalarField edens(domain), idens(domain);
    bool have_energy = false;
    if (cfg.kind != ExperimentKind::Checkerboard) {
        Microstructure ms = [&]() -> Microstructure {
            switch (cfg.kind) {
                case ExperimentKind::Laminate:
                    return simple_laminate(cfg.laminate, domain, cfg.eta).ms;
                case ExperimentKind::Branch:
                    return branched_habit_plane(cfg.branch, domain, cfg.eta).ms;
                default: return clustering_laminate(cfg.cluster, domain, cfg.eta).ms;
            }
        }();
        auto eb = total_energy(ms);
        edens = std::move(eb.elastic_density);
        idens = std::move(eb.interfacial_density);
        have_energy = true;
        const double f = (cfg.kind == ExperimentKind::Laminate) ? cfg.laminate.fraction : 1.0 / 3.0;
        epsilon = 18.0 * f * (1.0 - f);
    } else {
        epsilon = std::min(cfg.board.a, cfg.board.b);
    }

    CsvWriter csv("besov", {"h", "direction_index", "l1", "normalized", "ratio"});
    for (std::size_t di = 0; di < rep.directions.size(); ++di)
        for (std::size_t hi = 0; hi < rep.h_values.size(); ++hi) {
            double ratio = 0.0;
            if (have_energy) {
                const double h = rep.h_values[hi];
                const double Ei = density_over_inflated(idens, U, 4.0 * h);
                const double Ee = density_over_inflated(edens, U, 4.0 * h);
                const double l1 = rep.l1_table[di][hi];
                ratio = (l1 > 0.0 && Ei > 0.0 && Ee > 0.0)
                            ? theorem_comparator_ratio(l1, Ei, Ee, epsilon, h)
                            : 0.0;
            }
            csv.add_row({rep.h_values[hi], static_cast<double>(di), rep.l1_table[di][hi],
                         rep.normalized_table[di][hi], ratio});
        }
    csv.write((out.dir / "besov_report.csv").string());
    out.note("besov_report.csv");

    write_json(out.dir / "summary.json",
               json{{"fitted_exponent", rep.fitted_exponent},
                    {"fit_residual", rep.fit_residual},
                    {"seminorm", rep.seminorm},
                    {"sup_direction", rep.sup_direction}});
    out.note("summary.json");
}

void run_hmeasure(const ExperimentConfig& cfg, const BoxDomain& domain, Outputs& out) {
    EtaSequence seq = [&]() {
        switch (cfg.kind) {
            case ExperimentKind::Laminate:
                return laminate_eta_sequence(cfg.laminate, domain, cfg.eta,
                                             std::max(3, cfg.eta_count));
            case ExperimentKind::Branch:
                return branch_eta_sequence(cfg.branch, domain, cfg.eta,
                                           std::max(3, cfg.eta_count));
            default:
                throw ConfigError("hmeasure analysis supports laminate and branch kinds");
        }
    }();

    Window win;
    for (int a = 0; a < 3; ++a) {
        win.box.lo[a] = 0.1 * domain.extent()[a];
        win.box.hi[a] = 0.9 * domain.extent()[a];
    }
    const AngularSpectrum spec = angular_spectrum(seq, 1, win);

    CsvWriter csv("spectrum", {"dir_x", "dir_y", "dir_z", "mass"});
    const auto& normals = all_twin_normals();
    for (int b = 0; b < 6; ++b) {
        const Vec3 nb = normals[static_cast<std::size_t>(b)].components;
        csv.add_row({nb[0], nb[1], nb[2], spec.cone_mass[static_cast<std::size_t>(b)]});
    }
    csv.add_row({0.0, 0.0, 0.0, spec.other_mass});
    csv.write((out.dir / "spectrum.csv").string());
    out.note("spectrum.csv");

    const ScalarField osc = oscillation_field(seq.finest(), seq.limit_gradient, 1);
    const auto dom_tiles = single_direction_check(osc, seq.finest().eta, {4, 4, 1});
    CsvWriter vio("violations", {"center0", "center1", "center2", "top_mass", "second_mass",
                                 "flagged"});
    for (const auto& w : dom_tiles)
        vio.add_row({w.center_grid[0], w.center_grid[1], w.center_grid[2], w.top_mass,
                     w.second_mass, w.flagged ? 1.0 : 0.0});
    vio.write((out.dir / "violations.csv").string());
    out.note("violations.csv");
}

void run_scaling(const ExperimentConfig& cfg, const BoxDomain& domain, Outputs& out) {
    if (cfg.kind == ExperimentKind::Cluster) {
        const ClusterBuild b = clustering_laminate(cfg.cluster, domain, cfg.eta);
        CsvWriter ifc("interfaces", {"position"});
        for (double p : b.interface_positions) ifc.add_row({p});
        ifc.write((out.dir / "interfaces.csv").string());
        out.note("interfaces.csv");

        const double len = domain.extent()[0];
        std::vector<double> rel;
        for (double p : b.interface_positions) rel.push_back(p - domain.origin().dot(
            b.ms.domain().frame().row(0)));
        TraceSet trace(rel, len);
        const auto est = box_counting_dimension(
            trace, dyadic_scales(len, 1, std::max(8, cfg.cluster.generations + 2)));
        write_json(out.dir / "dimension.json",
                   json{{"dimension", est.dimension}, {"residual", est.residual}});
        out.note("dimension.json");
        return;
    }

    Microstructure ms = [&]() -> Microstructure {
        switch (cfg.kind) {
            case ExperimentKind::Laminate:
                return simple_laminate(cfg.laminate, domain, cfg.eta).ms;
            case ExperimentKind::Branch:
                return branched_habit_plane(cfg.branch, domain, cfg.eta).ms;
            default: throw ConfigError("scaling analysis supports laminate, branch, cluster");
        }
    }();
    const auto rows = rescaling_audit(ms, {1.0 / 3.0, 0.5, 2.0, 3.0});
    CsvWriter csv("audit", {"r", "ratio"});
    for (const auto& r : rows) csv.add_row({r.r, r.ratio_total});
    csv.write((out.dir / "audit.csv").string());
    out.note("audit.csv");

    if (cfg.kind == ExperimentKind::Branch) {
        const BranchTreeBuild b = branched_habit_plane(cfg.branch, domain, cfg.eta);
        const auto eb = total_energy(b.ms);
        // profile from a habit-plane point at mid-width
        const Vec3 g0 = 0.5 * (domain.lab_from_grid(Vec3::Zero()) +
                               domain.lab_from_grid(domain.extent()));
        const Vec3 xp = g0 - g0.dot(b.habit_normal) * b.habit_normal;
        const double hmax = 0.5 * cfg.branch.tower_height;
        std::vector<double> hs;
        for (int k = 0; k < 5; ++k) hs.push_back(hmax * std::pow(2.0, -k));
        const auto prof = blowup_profile(b.ms, eb.elastic_density, eb.interfacial_density,
                                         b.habit_normal, b.twin_normal, xp, b.transversal, hs);
        CsvWriter bl("blowup", {"h", "product", "compensated"});
        for (std::size_t m = 0; m < prof.h_values.size(); ++m)
            bl.add_row({prof.h_values[m], prof.product_values[m], prof.compensated[m]});
        bl.write((out.dir / "blowup.csv").string());
        out.note("blowup.csv");
    }
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
    RunManifest man;
    man.config_digest = config_digest(cfg);
    man.tool_version = tool_version();

    Outputs out;
    out.dir = cfg.output_dir;
    fs::create_directories(out.dir);

    const BoxDomain domain = [&]() {
        switch (cfg.kind) {
            case ExperimentKind::Laminate:
                return BoxDomain(Vec3::Zero(), Vec3::Ones(), cfg.grid,
                                 laminate_frame(cfg.laminate.normal));
            case ExperimentKind::Checkerboard:
                return BoxDomain(Vec3::Zero(), Vec3::Ones(), cfg.grid);
            case ExperimentKind::Branch:
                return make_branch_domain(cfg.branch, cfg.grid[0], cfg.grid[1]);
            default:
                return make_cluster_domain(cfg.cluster, cfg.grid[0], cfg.grid[1]);
        }
    }();

    auto timed = [&](const char* name, auto&& fn) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        man.timings_sec[name] = std::chrono::duration<double>(t1 - t0).count();
    };

    try {
        if (cfg.analyses.energy && cfg.kind != ExperimentKind::Checkerboard)
            timed("energy", [&] { run_energy(cfg, domain, out); });
        if (cfg.analyses.besov) timed("besov", [&] { run_besov(cfg, domain, out); });
        if (cfg.analyses.hmeasure) timed("hmeasure", [&] { run_hmeasure(cfg, domain, out); });
        if (cfg.analyses.scaling) timed("scaling", [&] { run_scaling(cfg, domain, out); });
    } catch (const std::exception& e) {
        man.failed = true;
        man.failure = e.what();
    }

    man.outputs = out.files;
    json mj{{"config_digest", man.config_digest},
            {"tool_version", man.tool_version},
            {"outputs", man.outputs},
            {"timings_sec", man.timings_sec},
            {"failed", man.failed}};
    if (man.failed) mj["failure"] = man.failure;
    write_json(out.dir / "manifest.json", mj);
    return man;
}

}  // namespace twinlab
