#pragma once

#include <map>
#include <string>
#include <vector>

#include "twinlab/io.hpp"

namespace twinlab {

enum class ExperimentKind { Laminate, Checkerboard, Branch, Cluster };

struct AnalysisToggles {
    bool energy = true;
    bool besov = false;
    bool hmeasure = false;
    bool scaling = false;
};

/// One batch experiment: a construction, an eta sweep and the analyses to run
/// on it. Parsed from a JSON config file.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Laminate;
    LaminateSpec laminate;
    CheckerboardSpec board;
    BranchTreeSpec branch;
    ClusterSpec cluster;
    std::array<int, 3> grid{64, 64, 64};
    double eta = 1e-3;
    int eta_count = 4;  // dyadic halvings starting at eta
    AnalysisToggles analyses;
    std::string output_dir = "out";
    uint64_t seed = 0;  // used by negative controls only
    std::string canonical;  // canonical serialized form (digest input)
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

/// Dry run: every named invariant and margin is checked without computing.
/// Returns the list of violations (empty when the config is valid).
std::vector<std::string> verify_config(const ExperimentConfig& cfg);

struct RunManifest {
    std::string config_digest;
    std::string tool_version;
    std::vector<std::string> outputs;            // file names relative to output_dir
    std::map<std::string, double> timings_sec;   // per analysis
    bool failed = false;
    std::string failure;
};

/// Executes the configured analyses; outputs are deterministic functions of
/// the config. Writes manifest.json in the output directory.
RunManifest run_experiment(const ExperimentConfig& cfg);

std::string tool_version();
std::string config_digest(const ExperimentConfig& cfg);

}  // namespace twinlab
