#include "twinlab/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace twinlab {

std::string format_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // prefer the shortest representation that round-trips
    for (int prec = 1; prec < 17; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

CsvWriter::CsvWriter(std::string schema_name, std::vector<std::string> columns)
    : schema_(std::move(schema_name)), columns_(std::move(columns)) {}

void CsvWriter::add_row(const std::vector<double>& values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) row += ',';
        row += format_full(values[i]);
    }
    rows_.push_back(std::move(row));
}

void CsvWriter::add_row_mixed(const std::vector<std::string>& values) {
    std::string row;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) row += ',';
        row += values[i];
    }
    rows_.push_back(std::move(row));
}

std::string CsvWriter::str() const {
    std::string out = "# twinlab csv v1 " + schema_ + "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (i) out += ',';
        out += columns_[i];
    }
    out += '\n';
    for (const auto& r : rows_) {
        out += r;
        out += '\n';
    }
    return out;
}

void CsvWriter::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("CsvWriter: cannot open " + path);
    f << str();
}

namespace {
constexpr char kMagic[8] = {'T', 'W', 'L', 'B', 'F', 'L', 'D', '1'};
}

void write_field_snapshot(const ScalarField& field, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_field_snapshot: cannot open " + path);
    f.write(kMagic, sizeof(kMagic));
    const BoxDomain& d = field.domain();
    auto put = [&](const void* p, std::size_t n) { f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); };
    const Vec3 o = d.origin(), e = d.extent();
    put(o.data(), 3 * sizeof(double));
    put(e.data(), 3 * sizeof(double));
    int32_t res[3] = {d.resolution()[0], d.resolution()[1], d.resolution()[2]};
    put(res, sizeof(res));
    const Mat3 fr = d.frame();
    put(fr.data(), 9 * sizeof(double));
    put(field.samples().data(), field.samples().size() * sizeof(double));
}

ScalarField read_field_snapshot(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_field_snapshot: cannot open " + path);
    char magic[8];
    f.read(magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("read_field_snapshot: bad magic");
    Vec3 o, e;
    f.read(reinterpret_cast<char*>(o.data()), 3 * sizeof(double));
    f.read(reinterpret_cast<char*>(e.data()), 3 * sizeof(double));
    int32_t res[3];
    f.read(reinterpret_cast<char*>(res), sizeof(res));
    Mat3 fr;
    f.read(reinterpret_cast<char*>(fr.data()), 9 * sizeof(double));
    BoxDomain d(o, e, {res[0], res[1], res[2]}, fr);
    std::vector<double> samples(d.cell_count());
    f.read(reinterpret_cast<char*>(samples.data()),
           static_cast<std::streamsize>(samples.size() * sizeof(double)));
    if (!f) throw std::runtime_error("read_field_snapshot: truncated file");
    return ScalarField(d, std::move(samples));
}

void write_field_csv(const ScalarField& field, const std::string& path) {
    CsvWriter w("field", {"i", "j", "k", "value"});
    const auto& n = field.domain().resolution();
    for (int i = 0; i < n[0]; ++i)
        for (int j = 0; j < n[1]; ++j)
            for (int k = 0; k < n[2]; ++k)
                w.add_row({static_cast<double>(i), static_cast<double>(j),
                           static_cast<double>(k), field.at(i, j, k)});
    w.write(path);
}

// --- JSON -----------------------------------------------------------------

using nlohmann::json;

json to_json(const TwinNormal& n) {
    return json{{"pair", n.pair_index}, {"sign", n.sign > 0 ? "+" : "-"}};
}

TwinNormal twin_normal_from_json(const json& j) {
    const int pair = j.at("pair").get<int>();
    const std::string sign = j.at("sign").get<std::string>();
    if (sign != "+" && sign != "-") throw std::invalid_argument("twin normal sign must be + or -");
    return twin_normal(pair, sign == "+" ? +1 : -1);
}

json to_json(const PeriodicIndicator& p) {
    return json{{"period", p.period}, {"fraction", p.fraction}, {"offset", p.offset}};
}

PeriodicIndicator periodic_indicator_from_json(const json& j) {
    PeriodicIndicator p;
    p.period = j.at("period").get<double>();
    p.fraction = j.at("fraction").get<double>();
    p.offset = j.value("offset", 0.0);
    return p;
}

json to_json(const LaminateSpec& s) {
    return json{{"variant_i", s.variant_i}, {"variant_j", s.variant_j},
                {"normal", to_json(s.normal)}, {"fraction", s.fraction},
                {"period", s.period},         {"offset", s.offset}};
}

LaminateSpec laminate_spec_from_json(const json& j) {
    LaminateSpec s;
    s.variant_i = j.at("variant_i").get<int>();
    s.variant_j = j.at("variant_j").get<int>();
    s.normal = twin_normal_from_json(j.at("normal"));
    s.fraction = j.at("fraction").get<double>();
    s.period = j.at("period").get<double>();
    s.offset = j.value("offset", 0.0);
    return s;
}

json to_json(const CheckerboardSpec& s) {
    return json{{"variant_i", s.variant_i}, {"nu_next", to_json(s.nu_next)},
                {"nu_prev", to_json(s.nu_prev)}, {"a", s.a}, {"b", s.b},
                {"set_A", to_json(s.set_A)}, {"set_B", to_json(s.set_B)}};
}

CheckerboardSpec checkerboard_spec_from_json(const json& j) {
    CheckerboardSpec s;
    s.variant_i = j.at("variant_i").get<int>();
    s.nu_next = twin_normal_from_json(j.at("nu_next"));
    s.nu_prev = twin_normal_from_json(j.at("nu_prev"));
    s.a = j.at("a").get<double>();
    s.b = j.at("b").get<double>();
    s.set_A = periodic_indicator_from_json(j.at("set_A"));
    s.set_B = periodic_indicator_from_json(j.at("set_B"));
    return s;
}

json to_json(const BranchTreeSpec& s) {
    return json{{"depth", s.depth},
                {"base_period", s.base_period},
                {"period_ratio", s.period_ratio},
                {"layer_thickness_ratio", s.layer_thickness_ratio},
                {"tower_height", s.tower_height},
                {"twin_normal", to_json(s.twin_normal)},
                {"habit_normal", to_json(s.habit_normal)}};
}

BranchTreeSpec branch_spec_from_json(const json& j) {
    BranchTreeSpec s;
    s.depth = j.at("depth").get<int>();
    s.base_period = j.at("base_period").get<double>();
    s.period_ratio = j.value("period_ratio", 0.5);
    s.layer_thickness_ratio = j.value("layer_thickness_ratio", s.layer_thickness_ratio);
    s.tower_height = j.value("tower_height", 0.48);
    s.twin_normal = j.contains("twin_normal") ? twin_normal_from_json(j.at("twin_normal"))
                                              : twin_normal(3, +1);
    s.habit_normal = j.contains("habit_normal") ? twin_normal_from_json(j.at("habit_normal"))
                                                : twin_normal(1, +1);
    return s;
}

json to_json(const ClusterSpec& s) {
    return json{{"epsilon", s.epsilon},
                {"generations", s.generations},
                {"transversal_direction", {s.transversal_direction[0], s.transversal_direction[1],
                                           s.transversal_direction[2]}},
                {"period_coupling", s.period_coupling},
                {"conjugate_classes", s.conjugate_classes}};
}

ClusterSpec cluster_spec_from_json(const json& j) {
    ClusterSpec s;
    s.epsilon = j.at("epsilon").get<double>();
    s.generations = j.at("generations").get<int>();
    if (j.contains("transversal_direction")) {
        const auto& v = j.at("transversal_direction");
        s.transversal_direction = Vec3(v.at(0).get<double>(), v.at(1).get<double>(),
                                       v.at(2).get<double>());
    }
    s.period_coupling = j.value("period_coupling", 0.25);
    s.conjugate_classes = j.value("conjugate_classes", false);
    return s;
}

}  // namespace twinlab
