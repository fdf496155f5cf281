#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "lahar/core/types.hpp"
#include "lahar/eval/report.hpp"
#include "lahar/pipeline/pipeline.hpp"
#include "lahar/preprocess/preprocess.hpp"

namespace lahar::config {

struct DatasetSection {
    std::filesystem::path dir;
    std::string day_glob{"DAY_*.txt"};
    bool concat_days{false};
};

struct RunSection {
    std::size_t n{20};
    std::size_t m{15};
    std::string backend{"mock"}; // mock | mock-adversarial | replay | record | live
    std::string model{"gpt-4-32k-0613"};
    double temperature{0.0};
    int max_output_tokens{0};
    std::size_t parallel{1};
    std::filesystem::path template_dir;
    std::filesystem::path stage1_examples;
    std::filesystem::path stage2_examples;
    std::string system_role{"context_instructions"}; // or "all_user"
    std::string unassigned_policy{"broadcast"};      // or "drop"
    std::string endpoint; // live backend base URL; key comes from env
};

struct EvalSection {
    std::set<int> away_ids;
    std::int64_t min_segment_len{120};
    std::string subject_matching{"identity"}; // or "best_permutation"
};

/// One house's full run configuration. Relative paths resolve against the
/// config file's directory.
struct HouseConfig {
    DatasetSection dataset;
    core::HouseContext context;
    core::LabelMap regroup;
    std::vector<preprocess::FilterRule> filters;
    RunSection run;
    EvalSection eval;
    std::filesystem::path config_dir;

    pipeline::RunOptions run_options() const;
    eval::SubjectMatching subject_matching() const;
};

/// Throws ConfigError on missing/invalid sections; HouseContext violations
/// are reported all at once.
HouseConfig load_house_config(const std::filesystem::path& path);

} // namespace lahar::config
