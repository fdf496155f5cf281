#include <cstdio>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lahar/cli/commands.hpp"
#include "lahar/core/errors.hpp"

namespace {

namespace fs = std::filesystem;

lahar::config::HouseConfig load_config_or_exit(const std::string& path) {
    if (!fs::exists(path)) {
        std::fprintf(stderr, "error: config file not found: %s\n", path.c_str());
        std::exit(lahar::cli::kExitConfigError);
    }
    try {
        return lahar::config::load_house_config(path);
    } catch (const lahar::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::exit(lahar::cli::kExitConfigError);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-stage LLM activity recognition over ambient sensor streams"};
    app.require_subcommand(1);

    std::string config_path;
    std::string data_override;
    std::string out_dir = "out";
    std::string house_override;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "House config file (JSON)")->required();
        cmd->add_option("--out", out_dir, "Output directory (manifest, segments, results, reports)");
        cmd->add_option("--house", house_override, "Override the configured house id");
    };

    CLI::App* ingest = app.add_subcommand("ingest", "Parse the dataset and write the segment manifest");
    add_common(ingest);
    ingest->add_option("--data", data_override, "Override the configured dataset directory");

    CLI::App* run = app.add_subcommand("run", "Run both stages over ingested segments");
    add_common(run);
    std::string backend;
    std::size_t n_override = 0, m_override = 0, parallel_override = 0;
    std::string transcript_dir;
    std::vector<std::string> segment_ids;
    run->add_option("--backend", backend, "mock | mock-adversarial | replay | replay-or-mock | live");
    run->add_option("--n", n_override, "Stage-1 chunk size (event pairs per request)");
    run->add_option("--m", m_override, "Stage-2 chunk size (descriptions per request)");
    run->add_option("--parallel", parallel_override, "Concurrent segments");
    run->add_option("--transcript-dir", transcript_dir, "Transcript directory for replay");
    run->add_option("--segments", segment_ids, "Segment ids to run (default: all)")->delimiter(',');

    CLI::App* eval = app.add_subcommand("eval", "Score results against ground truth");
    add_common(eval);
    std::string scenario;
    eval->add_option("--scenario", scenario, "Restrict to one scenario (e.g. Single_A)");

    CLI11_PARSE(app, argc, argv);

    lahar::config::HouseConfig cfg = load_config_or_exit(config_path);
    if (!data_override.empty()) {
        cfg.dataset.dir = data_override;
    }
    if (!house_override.empty()) {
        cfg.context.house_id = house_override;
    }

    try {
        if (ingest->parsed()) {
            const auto summary = lahar::cli::cmd_ingest(cfg, out_dir);
            std::printf("ingested %zu day(s): %zu segment(s) (%zu SINGLE, %zu MULTI)\n",
                        summary.days, summary.segments, summary.single_segments,
                        summary.multi_segments);
            for (const auto& w : summary.warnings) {
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            }
            return lahar::cli::kExitOk;
        }
        if (run->parsed()) {
            lahar::cli::RunOverrides overrides;
            if (!backend.empty()) {
                overrides.backend = backend;
            }
            if (n_override > 0) {
                overrides.n = n_override;
            }
            if (m_override > 0) {
                overrides.m = m_override;
            }
            if (parallel_override > 0) {
                overrides.parallel = parallel_override;
            }
            if (!transcript_dir.empty()) {
                overrides.transcript_dir = transcript_dir;
            }
            bool all = false;
            for (const auto& id : segment_ids) {
                all = all || id == "all";
            }
            if (!all) {
                overrides.segments = segment_ids;
            }
            const auto summary = lahar::cli::cmd_run(cfg, out_dir, overrides);
            std::printf("ran %zu segment(s), %zu failed, %zu backend call(s)\n",
                        summary.segments_run, summary.segments_failed, summary.backend_calls);
            return summary.segments_failed == 0 ? lahar::cli::kExitOk
                                                : lahar::cli::kExitDatasetError;
        }
        if (eval->parsed()) {
            const auto summary = lahar::cli::cmd_eval(
                cfg, out_dir,
                scenario.empty() ? std::nullopt : std::optional<std::string>(scenario));
            std::printf("evaluated %zu segment(s) across %zu scenario(s)\n",
                        summary.segments_evaluated, summary.scenarios.size());
            return lahar::cli::kExitOk;
        }
    } catch (const lahar::BackendError& e) {
        std::fprintf(stderr, "error: backend unavailable: %s\n", e.what());
        return lahar::cli::kExitBackendUnavailable;
    } catch (const lahar::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return lahar::cli::kExitConfigError;
    } catch (const lahar::MalformedLine& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return lahar::cli::kExitDatasetError;
    } catch (const lahar::MissingDay& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return lahar::cli::kExitDatasetError;
    } catch (const lahar::Error& e) {
        const std::string what = e.what();
        std::fprintf(stderr, "error: %s\n", what.c_str());
        if (what.rfind("results incomplete", 0) == 0) {
            return lahar::cli::kExitResultsIncomplete;
        }
        return lahar::cli::kExitDatasetError;
    }
    return lahar::cli::kExitOk;
}
