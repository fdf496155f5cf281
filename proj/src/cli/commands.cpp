#include "lahar/cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "lahar/core/errors.hpp"
#include "lahar/eval/report.hpp"
#include "lahar/ingest/ingest.hpp"
#include "lahar/llm/http_backend.hpp"
#include "lahar/llm/mock_backend.hpp"
#include "lahar/llm/replay.hpp"
#include "lahar/pipeline/artifacts.hpp"
#include "lahar/segmenter/segmenter.hpp"
#include "lahar/util/fs.hpp"

namespace lahar::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

IngestSummary cmd_ingest(const config::HouseConfig& cfg, const fs::path& out_dir) {
    ingest::HouseData data = ingest::load_house(cfg.dataset.dir, cfg.context,
                                                cfg.dataset.concat_days, cfg.dataset.day_glob);

    segmenter::SegmentOptions opts;
    opts.away_ids = cfg.eval.away_ids;
    opts.min_len = cfg.eval.min_segment_len;
    opts.label_map = cfg.regroup;
    opts.filter_rules = cfg.filters;

    IngestSummary summary;
    summary.days = data.days.size();
    summary.warnings = data.warnings;

    ordered_json manifest;
    manifest["house"] = cfg.context.house_id;
    ordered_json segment_list = ordered_json::array();

    for (std::size_t d = 0; d < data.days.size(); ++d) {
        std::string day_tag;
        if (!cfg.dataset.concat_days) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "d%02zu", d);
            day_tag = buf;
        }
        const std::vector<core::Segment> segments =
            segmenter::build_segments(data.days[d], cfg.context, opts, day_tag);
        for (const auto& seg : segments) {
            pipeline::PreparedSegment prepared;
            prepared.segment = seg;
            prepared.pairs = preprocess::pair_events(seg.events, cfg.context, seg.span);

            const std::string rel = "segments/" + seg.id + ".json";
            util::write_file_atomic(out_dir / rel,
                                    pipeline::prepared_segment_to_json(prepared));

            ordered_json entry;
            entry["id"] = seg.id;
            entry["scenario"] = core::to_string(seg.scenario);
            entry["span"] = ordered_json{{"start", seg.span.start.render()},
                                         {"end", seg.span.end.render()}};
            entry["present_residents"] = seg.present_residents;
            entry["event_count"] = seg.events.size();
            entry["pair_count"] = prepared.pairs.size();
            entry["file"] = rel;
            segment_list.push_back(std::move(entry));

            ++summary.segments;
            if (seg.scenario == core::Scenario::Single) {
                ++summary.single_segments;
            } else {
                ++summary.multi_segments;
            }
        }
    }

    manifest["segments"] = std::move(segment_list);
    manifest["warnings"] = summary.warnings;
    util::write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
    return summary;
}

llm::BackendPtr make_backend(const config::HouseConfig& cfg, const std::string& kind,
                             const fs::path& transcript_dir) {
    if (kind == "mock") {
        return std::make_shared<llm::MockBackend>(cfg.context);
    }
    if (kind == "mock-adversarial") {
        return std::make_shared<llm::MockBackend>(
            cfg.context, llm::MockBackend::default_adversarial_schedule());
    }
    if (kind == "replay" || kind == "replay-or-mock") {
        llm::TranscriptStore store;
        if (fs::exists(transcript_dir)) {
            store.load_directory(transcript_dir);
        }
        llm::BackendPtr fallback;
        if (kind == "replay-or-mock") {
            fallback = std::make_shared<llm::MockBackend>(cfg.context);
        }
        return std::make_shared<llm::ReplayBackend>(std::move(store), std::move(fallback));
    }
    if (kind == "live") {
        llm::HttpBackendConfig http;
        http.base_url = cfg.run.endpoint;
        if (const char* env = std::getenv("LAHAR_ENDPOINT"); env != nullptr && *env != '\0') {
            http.base_url = env;
        }
        if (const char* env = std::getenv("LAHAR_API_KEY"); env != nullptr) {
            http.api_key = env;
        } else if (const char* openai = std::getenv("OPENAI_API_KEY"); openai != nullptr) {
            http.api_key = openai;
        }
        return std::make_shared<llm::HttpBackend>(std::move(http));
    }
    throw ConfigError("unknown backend '" + kind + "'");
}

namespace {

std::vector<ordered_json> manifest_segments(const fs::path& out_dir) {
    const fs::path manifest_path = out_dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        throw Error("no manifest at " + manifest_path.string() + " (run ingest first)");
    }
    nlohmann::json manifest = nlohmann::json::parse(util::read_file(manifest_path));
    std::vector<ordered_json> segments;
    for (const auto& entry : manifest.at("segments")) {
        segments.push_back(entry);
    }
    return segments;
}

} // namespace

RunSummary cmd_run(const config::HouseConfig& cfg, const fs::path& out_dir,
                   const RunOverrides& overrides) {
    const std::string backend_kind = overrides.backend.value_or(cfg.run.backend);
    const fs::path transcript_src =
        overrides.transcript_dir.value_or(out_dir / "transcripts");
    const std::size_t parallel =
        std::max<std::size_t>(1, overrides.parallel.value_or(cfg.run.parallel));

    pipeline::RunOptions run_opts = cfg.run_options();
    if (overrides.n) {
        run_opts.n = *overrides.n;
    }
    if (overrides.m) {
        run_opts.m = *overrides.m;
    }

    const promptgen::TemplateSet templates = promptgen::TemplateSet::load(
        cfg.run.template_dir, cfg.run.stage1_examples, cfg.run.stage2_examples);
    const llm::BackendPtr base = make_backend(cfg, backend_kind, transcript_src);

    std::vector<ordered_json> selected;
    for (const auto& entry : manifest_segments(out_dir)) {
        const std::string id = entry.at("id").get<std::string>();
        if (overrides.segments.empty() ||
            std::find(overrides.segments.begin(), overrides.segments.end(), id) !=
                overrides.segments.end()) {
            selected.push_back(entry);
        }
    }

    RunSummary summary;
    std::mutex summary_mutex;
    std::atomic<std::size_t> next{0};
    std::atomic<bool> abort{false};
    std::string abort_message;

    auto worker = [&]() {
        while (!abort.load()) {
            const std::size_t index = next.fetch_add(1);
            if (index >= selected.size()) {
                return;
            }
            const std::string id = selected[index].at("id").get<std::string>();
            try {
                const pipeline::PreparedSegment prepared = pipeline::prepared_segment_from_json(
                    util::read_file(out_dir / ("segments/" + id + ".json")));

                const std::string transcript_rel = "transcripts/" + id + ".jsonl";
                const fs::path transcript_path = out_dir / transcript_rel;
                std::error_code ec;
                fs::remove(transcript_path, ec); // fresh transcript per run
                auto writer = std::make_shared<llm::TranscriptWriter>(transcript_path);
                llm::RecordingBackend recording(base, writer);

                pipeline::SegmentResult result =
                    pipeline::run_segment(prepared, cfg.context, templates, recording, run_opts);
                result.transcript_path = transcript_rel;

                util::write_file_atomic(out_dir / ("results/" + id + ".json"),
                                        pipeline::segment_result_to_json(result));
                std::lock_guard<std::mutex> lock(summary_mutex);
                ++summary.segments_run;
                summary.backend_calls += result.backend_calls;
            } catch (const BackendError& e) {
                std::lock_guard<std::mutex> lock(summary_mutex);
                abort_message = e.what();
                abort.store(true);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(summary_mutex);
                ++summary.segments_failed;
                abort_message = std::string("segment ") + id + ": " + e.what();
            }
        }
    };

    std::vector<std::thread> threads;
    const std::size_t thread_count = std::min(parallel, std::max<std::size_t>(1, selected.size()));
    threads.reserve(thread_count);
    for (std::size_t i = 0; i < thread_count; ++i) {
        threads.emplace_back(worker);
    }
    for (auto& t : threads) {
        t.join();
    }

    if (abort.load()) {
        throw BackendUnavailable(abort_message); // partial results are on disk
    }
    return summary;
}

std::vector<std::string> scenario_sort_keys(const std::vector<std::string>& names) {
    std::vector<std::string> sorted = names;
    std::sort(sorted.begin(), sorted.end(), [](const std::string& a, const std::string& b) {
        auto split = [](const std::string& s) {
            const std::size_t underscore = s.find('_');
            const std::string kind = s.substr(0, underscore);
            const std::string house = underscore == std::string::npos ? "" : s.substr(underscore + 1);
            return std::make_pair(house, kind == "Single" ? 0 : 1);
        };
        return split(a) < split(b);
    });
    return sorted;
}

EvalSummary cmd_eval(const config::HouseConfig& cfg, const fs::path& out_dir,
                     const std::optional<std::string>& scenario_filter) {
    const eval::ClassIndex classes(cfg.context);
    const eval::SubjectMatching matching = cfg.subject_matching();

    std::vector<eval::SegmentEvaluation> evaluations;
    for (const auto& entry : manifest_segments(out_dir)) {
        const std::string id = entry.at("id").get<std::string>();
        const pipeline::PreparedSegment prepared = pipeline::prepared_segment_from_json(
            util::read_file(out_dir / ("segments/" + id + ".json")));
        const std::string scenario =
            eval::scenario_name(prepared.segment.scenario, prepared.segment.house_id);
        if (scenario_filter && *scenario_filter != scenario) {
            continue;
        }
        const fs::path result_path = out_dir / ("results/" + id + ".json");
        if (!fs::exists(result_path)) {
            throw Error("results incomplete: missing " + result_path.string());
        }
        const pipeline::SegmentResult result =
            pipeline::segment_result_from_json(util::read_file(result_path));
        evaluations.push_back(
            eval::evaluate_segment(result, prepared.segment, cfg.context, classes, matching));
    }
    if (evaluations.empty()) {
        throw Error("results incomplete: no segments" +
                    (scenario_filter ? " for scenario " + *scenario_filter : std::string()));
    }

    std::vector<eval::ScenarioReport> reports = eval::pool_scenarios(evaluations, classes);
    std::vector<std::string> names;
    for (const auto& r : reports) {
        names.push_back(r.scenario);
    }
    const std::vector<std::string> order = scenario_sort_keys(names);
    std::vector<eval::ScenarioReport> ordered;
    for (const auto& name : order) {
        for (auto& r : reports) {
            if (r.scenario == name) {
                ordered.push_back(std::move(r));
                break;
            }
        }
    }

    util::write_file_atomic(out_dir / "reports/per_class.csv",
                            eval::per_class_csv(ordered, classes, cfg.context));
    util::write_file_atomic(out_dir / "reports/summary_grid.csv",
                            eval::summary_grid_csv(ordered, classes, cfg.context));
    util::write_file_atomic(out_dir / "reports/aggregates.json",
                            eval::aggregates_json(ordered, classes, cfg.context));
    EvalSummary summary;
    summary.segments_evaluated = evaluations.size();
    for (const auto& report : ordered) {
        util::write_file_atomic(out_dir / ("reports/confusion_" + report.scenario + ".csv"),
                                eval::confusion_csv(report, classes, cfg.context));
        summary.scenarios.push_back(report.scenario);
    }
    return summary;
}

} // namespace lahar::cli
