#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "twinlab/constructions.hpp"

namespace twinlab {

/// Shortest decimal form that round-trips to the same double.
std::string format_full(double v);

/// CSV table with a versioned schema comment line. All numbers are written in
/// round-trip precision so identical runs produce identical bytes.
class CsvWriter {
public:
    CsvWriter(std::string schema_name, std::vector<std::string> columns);
    void add_row(const std::vector<double>& values);
    void add_row_mixed(const std::vector<std::string>& values);
    void write(const std::string& path) const;
    std::string str() const;

private:
    std::string schema_;
    std::vector<std::string> columns_;
    std::vector<std::string> rows_;
};

/// Flat binary snapshot: header (magic, version, domain descriptor) followed
/// by the row-major samples.
void write_field_snapshot(const ScalarField& field, const std::string& path);
ScalarField read_field_snapshot(const std::string& path);

/// CSV export for small grids (one row per cell: i, j, k, value).
void write_field_csv(const ScalarField& field, const std::string& path);

// JSON round-trips for the construction specs.
nlohmann::json to_json(const TwinNormal& n);
TwinNormal twin_normal_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PeriodicIndicator& p);
PeriodicIndicator periodic_indicator_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LaminateSpec& s);
LaminateSpec laminate_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const CheckerboardSpec& s);
CheckerboardSpec checkerboard_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const BranchTreeSpec& s);
BranchTreeSpec branch_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ClusterSpec& s);
ClusterSpec cluster_spec_from_json(const nlohmann::json& j);

}  // namespace twinlab
