#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "twinlab/experiment.hpp"

// Exit codes: 0 success, 1 analysis failure, 2 invalid config.
int main(int argc, char** argv) {
    CLI::App app{"twinlab - builds twin microstructures and measures their regularity and scaling"};
    app.require_subcommand(1);

    std::string run_config, verify_config_path;
    auto* run_cmd = app.add_subcommand("run", "execute the analyses of a config file");
    run_cmd->add_option("config", run_config, "JSON experiment config")->required();
    auto* verify_cmd = app.add_subcommand("verify", "validate a config without computing");
    verify_cmd->add_option("config", verify_config_path, "JSON experiment config")->required();
    auto* version_cmd = app.add_subcommand("version", "print the tool version");

    CLI11_PARSE(app, argc, argv);

    if (version_cmd->parsed()) {
        std::printf("%s\n", twinlab::tool_version().c_str());
        return 0;
    }

    if (verify_cmd->parsed()) {
        try {
            const auto cfg = twinlab::parse_config_file(verify_config_path);
            const auto violations = twinlab::verify_config(cfg);
            if (violations.empty()) {
                std::printf("config ok (digest %s)\n", twinlab::config_digest(cfg).c_str());
            } else {
                for (const auto& v : violations) std::printf("violation: %s\n", v.c_str());
            }
            return 0;
        } catch (const twinlab::ConfigError& e) {
            std::fprintf(stderr, "invalid config: %s\n", e.what());
            return 2;
        }
    }

    try {
        const auto cfg = twinlab::parse_config_file(run_config);
        const auto violations = twinlab::verify_config(cfg);
        if (!violations.empty()) {
            for (const auto& v : violations) std::fprintf(stderr, "invalid config: %s\n", v.c_str());
            return 2;
        }
        const auto manifest = twinlab::run_experiment(cfg);
        if (manifest.failed) {
            std::fprintf(stderr, "analysis failed: %s\n", manifest.failure.c_str());
            return 1;
        }
        std::printf("run complete (digest %s), %zu output file(s) in %s\n",
                    manifest.config_digest.c_str(), manifest.outputs.size(),
                    cfg.output_dir.c_str());
        return 0;
    } catch (const twinlab::ConfigError& e) {
        std::fprintf(stderr, "invalid config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "analysis failed: %s\n", e.what());
        return 1;
    }
}
