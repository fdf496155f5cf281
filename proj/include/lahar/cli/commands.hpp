#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lahar/config/config.hpp"
#include "lahar/llm/backend.hpp"
#include "lahar/pipeline/pipeline.hpp"

namespace lahar::cli {

// exit codes shared by the binary and the tests
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDatasetError = 3;
inline constexpr int kExitBackendUnavailable = 4;
inline constexpr int kExitResultsIncomplete = 5;

struct IngestSummary {
    std::size_t days{0};
    std::size_t segments{0};
    std::size_t single_segments{0};
    std::size_t multi_segments{0};
    std::vector<std::string> warnings;
};

/// ingest -> preprocess -> segment; writes <out>/manifest.json and
/// <out>/segments/<id>.json (events, pairs, ground truth).
IngestSummary cmd_ingest(const config::HouseConfig& cfg, const std::filesystem::path& out_dir);

struct RunOverrides {
    std::optional<std::string> backend;
    std::optional<std::size_t> n;
    std::optional<std::size_t> m;
    std::optional<std::size_t> parallel;
    std::optional<std::filesystem::path> transcript_dir; // replay source
    std::vector<std::string> segments;                   // empty = all
};

struct RunSummary {
    std::size_t segments_run{0};
    std::size_t segments_failed{0};
    std::size_t backend_calls{0};
};

/// Runs both stages for the selected segments; writes
/// <out>/results/<id>.json and <out>/transcripts/<id>.jsonl.
/// Throws BackendUnavailable after preserving partial results.
RunSummary cmd_run(const config::HouseConfig& cfg, const std::filesystem::path& out_dir,
                   const RunOverrides& overrides);

struct EvalSummary {
    std::vector<std::string> scenarios;
    std::size_t segments_evaluated{0};
};

/// Pools scored segments per scenario and writes
/// reports/{per_class.csv, summary_grid.csv, aggregates.json,
/// confusion_<scenario>.csv}. Throws Error("results incomplete...") when a
/// requested segment has no result file.
EvalSummary cmd_eval(const config::HouseConfig& cfg, const std::filesystem::path& out_dir,
                     const std::optional<std::string>& scenario_filter);

/// Backend factory: mock | mock-adversarial | replay | replay-or-mock | live.
llm::BackendPtr make_backend(const config::HouseConfig& cfg, const std::string& kind,
                             const std::filesystem::path& transcript_dir);

/// Canonical report order: house id ascending, Single before Multi.
std::vector<std::string> scenario_sort_keys(const std::vector<std::string>& names);

} // namespace lahar::cli
