#include "lahar/config/config.hpp"

#include <nlohmann/json.hpp>

#include "lahar/core/errors.hpp"
#include "lahar/core/validate.hpp"
#include "lahar/util/fs.hpp"

namespace lahar::config {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

core::HouseContext parse_context(const json& j) {
    core::HouseContext ctx;
    ctx.house_id = j.value("house_id", "");
    ctx.residents = j.value("residents", std::vector<std::string>{});
    ctx.background = j.value("background", "");
    for (const auto& room : j.value("rooms", json::array())) {
        core::Room r;
        r.name = room.value("name", "");
        r.furniture = room.value("furniture", std::vector<std::string>{});
        r.sensor_ids = room.value("sensors", std::vector<std::string>{});
        ctx.rooms.push_back(std::move(r));
    }
    for (const auto& sensor : j.value("sensors", json::array())) {
        core::SensorMeta s;
        s.id = sensor.value("id", "");
        s.kind = sensor.value("kind", "");
        s.location = sensor.value("location", "");
        s.furniture = sensor.value("furniture", "");
        s.description = sensor.value("description", "");
        ctx.sensors.push_back(std::move(s));
    }
    for (const auto& activity : j.value("activities", json::array())) {
        core::Activity a;
        a.id = activity.at("id").get<int>();
        a.label = activity.value("label", "");
        a.habit = activity.value("habit", "");
        ctx.activity_catalog.push_back(std::move(a));
    }
    for (const auto& [resident, text] : j.value("schedule", json::object()).items()) {
        ctx.schedule[resident] = text.get<std::string>();
    }
    return ctx;
}

core::LabelMap parse_regroup(const json& j) {
    core::LabelMap map;
    for (const auto& [raw, grouped] : j.value("map", json::object()).items()) {
        map.raw_to_grouped[std::stoi(raw)] = grouped.get<int>();
    }
    for (const auto& id : j.value("dropped", json::array())) {
        map.dropped.insert(id.get<int>());
    }
    return map;
}

std::vector<preprocess::FilterRule> parse_filters(const json& j) {
    std::vector<preprocess::FilterRule> rules;
    for (const auto& rule : j) {
        preprocess::FilterRule r;
        const std::string kind = rule.value("kind", "");
        if (kind == "drop_always") {
            r.kind = preprocess::FilterRule::Kind::DropAlways;
        } else if (kind == "drop_unless_coactive") {
            r.kind = preprocess::FilterRule::Kind::DropUnlessCoactive;
        } else {
            throw ConfigError("unknown filter kind: '" + kind + "'");
        }
        r.sensor = rule.value("sensor", "");
        for (const auto& s : rule.value("coactive", json::array())) {
            r.coactive_set.insert(s.get<std::string>());
        }
        r.window = rule.value("window", std::int64_t{0});
        rules.push_back(std::move(r));
    }
    return rules;
}

} // namespace

pipeline::RunOptions HouseConfig::run_options() const {
    pipeline::RunOptions opts;
    opts.n = run.n;
    opts.m = run.m;
    opts.unassigned = run.unassigned_policy == "drop" ? pipeline::UnassignedPolicy::Drop
                                                      : pipeline::UnassignedPolicy::Broadcast;
    opts.model = run.model;
    opts.temperature = run.temperature;
    opts.max_output_tokens = run.max_output_tokens;
    return opts;
}

eval::SubjectMatching HouseConfig::subject_matching() const {
    return eval.subject_matching == "best_permutation" ? eval::SubjectMatching::BestPermutation
                                                       : eval::SubjectMatching::Identity;
}

HouseConfig load_house_config(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(util::read_file(path));
    } catch (const json::exception& e) {
        throw ConfigError("cannot parse config " + path.string() + ": " + e.what());
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }

    HouseConfig cfg;
    cfg.config_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    if (!j.contains("context")) {
        throw ConfigError("config lacks a context section");
    }
    cfg.context = parse_context(j.at("context"));
    const std::vector<std::string> violations = core::validate_house_context(cfg.context);
    if (!violations.empty()) {
        std::string message = "invalid house context:";
        for (const auto& v : violations) {
            message += "\n  - " + v;
        }
        throw ConfigError(message);
    }

    const json dataset = j.value("dataset", json::object());
    cfg.dataset.dir = resolve(cfg.config_dir, dataset.value("dir", "."));
    cfg.dataset.day_glob = dataset.value("day_glob", "DAY_*.txt");
    cfg.dataset.concat_days = dataset.value("concat_days", false);

    cfg.regroup = parse_regroup(j.value("regroup", json::object()));
    cfg.filters = parse_filters(j.value("filters", json::array()));

    const json run = j.value("run", json::object());
    cfg.run.n = run.value("n", std::size_t{20});
    cfg.run.m = run.value("m", std::size_t{15});
    if (cfg.run.n < 1 || cfg.run.m < 1) {
        throw ConfigError("chunk sizes n and m must be >= 1");
    }
    cfg.run.backend = run.value("backend", "mock");
    cfg.run.model = run.value("model", "gpt-4-32k-0613");
    cfg.run.temperature = run.value("temperature", 0.0);
    if (cfg.run.temperature < 0) {
        throw ConfigError("temperature must be >= 0");
    }
    cfg.run.max_output_tokens = run.value("max_output_tokens", 0);
    cfg.run.parallel = run.value("parallel", std::size_t{1});
    cfg.run.template_dir = resolve(cfg.config_dir, run.value("template_dir", "templates"));
    cfg.run.stage1_examples =
        resolve(cfg.config_dir, run.value("stage1_examples", "stage1_examples.txt"));
    cfg.run.stage2_examples =
        resolve(cfg.config_dir, run.value("stage2_examples", "stage2_examples.txt"));
    cfg.run.system_role = run.value("system_role", "context_instructions");
    cfg.run.unassigned_policy = run.value("unassigned_policy", "broadcast");
    cfg.run.endpoint = run.value("endpoint", "");

    const json eval = j.value("eval", json::object());
    for (const auto& id : eval.value("away_ids", json::array())) {
        cfg.eval.away_ids.insert(id.get<int>());
    }
    cfg.eval.min_segment_len = eval.value("min_segment_len", std::int64_t{120});
    cfg.eval.subject_matching = eval.value("subject_matching", "identity");

    return cfg;
}

} // namespace lahar::config
