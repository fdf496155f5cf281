#include "lahar/eval/report.hpp"

#include <algorithm>
#include <cstdio>

#include <nlohmann/json.hpp>

namespace lahar::eval {

using nlohmann::ordered_json;

std::string scenario_name(core::Scenario scenario, const std::string& house_id) {
    return std::string(scenario == core::Scenario::Single ? "Single_" : "Multi_") + house_id;
}

namespace {

struct ResidentMatrices {
    SecondMatrix pred;
    SecondMatrix truth;
};

double micro_f1(const std::vector<ClassCounts>& counts) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (const auto& c : counts) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
    }
    const double denom = static_cast<double>(2 * tp + fp + fn);
    return denom > 0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

std::vector<ClassCounts> sum_pairings(const std::vector<SecondMatrix>& preds,
                                      const std::vector<SecondMatrix>& truths,
                                      const std::vector<std::size_t>& assignment) {
    std::vector<ClassCounts> total;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        std::vector<ClassCounts> counts = score(preds[assignment[i]], truths[i]);
        if (total.empty()) {
            total = std::move(counts);
        } else {
            for (std::size_t k = 0; k < total.size(); ++k) {
                total[k] += counts[k];
            }
        }
    }
    return total;
}

} // namespace

SegmentEvaluation evaluate_segment(const pipeline::SegmentResult& result,
                                   const core::Segment& segment, const core::HouseContext& ctx,
                                   const ClassIndex& classes, SubjectMatching matching) {
    SegmentEvaluation eval;
    eval.segment_id = segment.id;
    eval.scenario = scenario_name(segment.scenario, segment.house_id);
    eval.confusion = ConfusionMatrix(classes.size());
    eval.seconds = segment.span.length();

    // present residents in catalog order
    std::vector<std::string> present;
    for (const auto& r : ctx.residents) {
        if (std::find(segment.present_residents.begin(), segment.present_residents.end(), r) !=
            segment.present_residents.end()) {
            present.push_back(r);
        }
    }

    std::vector<SecondMatrix> truths;
    std::vector<SecondMatrix> preds;
    for (const auto& r : present) {
        auto truth_it = segment.ground_truth.find(r);
        truths.push_back(truth_it != segment.ground_truth.end()
                             ? encode_truth(truth_it->second, segment.span, classes)
                             : SecondMatrix(static_cast<std::size_t>(segment.span.length()),
                                            classes.size()));
        auto pred_it = result.timelines.find(r);
        preds.push_back(pred_it != result.timelines.end()
                            ? encode(pred_it->second, segment.span, classes)
                            : SecondMatrix(static_cast<std::size_t>(segment.span.length()),
                                           classes.size()));
    }

    std::vector<std::size_t> assignment(present.size());
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        assignment[i] = i;
    }
    if (matching == SubjectMatching::BestPermutation && present.size() > 1) {
        std::vector<std::size_t> perm = assignment;
        std::vector<std::size_t> best = assignment;
        double best_f1 = -1.0;
        std::sort(perm.begin(), perm.end());
        do {
            const double f1 = micro_f1(sum_pairings(preds, truths, perm));
            if (f1 > best_f1) {
                best_f1 = f1;
                best = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        assignment = best;
    }

    eval.counts.assign(classes.size(), ClassCounts{});
    for (std::size_t i = 0; i < present.size(); ++i) {
        const std::vector<ClassCounts> counts = score(preds[assignment[i]], truths[i]);
        for (std::size_t k = 0; k < counts.size(); ++k) {
            eval.counts[k] += counts[k];
        }
        eval.confusion += confusion(preds[assignment[i]], truths[i]);
    }
    return eval;
}

std::vector<ScenarioReport> pool_scenarios(const std::vector<SegmentEvaluation>& evaluations,
                                           const ClassIndex& classes) {
    std::map<std::string, ScenarioReport> pooled;
    for (const auto& eval : evaluations) {
        auto [it, inserted] = pooled.try_emplace(eval.scenario);
        ScenarioReport& report = it->second;
        if (inserted) {
            report.scenario = eval.scenario;
            report.counts.assign(classes.size(), ClassCounts{});
            report.confusion = ConfusionMatrix(classes.size());
        }
        for (std::size_t k = 0; k < classes.size(); ++k) {
            report.counts[k] += eval.counts[k];
        }
        report.confusion += eval.confusion;
    }

    std::vector<std::size_t> eligible; // catalog classes except reserved id 0
    for (std::size_t k = 0; k < classes.size(); ++k) {
        if (classes.id_of(k) != 0) {
            eligible.push_back(k);
        }
    }

    std::vector<ScenarioReport> reports;
    for (auto& [name, report] : pooled) {
        (void)name;
        for (std::size_t k = 0; k < classes.size(); ++k) {
            const ClassCounts& c = report.counts[k];
            const Ratios r = ratios_from_counts(c);
            report.per_class[classes.id_of(k)] =
                ClassScore{c.tp, c.fp, c.fn, r.precision, r.recall, r.f1, c.support()};
        }
        report.aggregates = aggregate(report.counts, eligible);
        reports.push_back(std::move(report));
    }
    return reports;
}

namespace {

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string fmt_pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}

bool class_present(const ScenarioReport& report, std::size_t column) {
    const ClassCounts& c = report.counts[column];
    return c.tp + c.fn > 0 || c.tp + c.fp > 0;
}

} // namespace

std::string per_class_csv(const std::vector<ScenarioReport>& reports, const ClassIndex& classes,
                          const core::HouseContext& ctx) {
    std::string out = "scenario,class,precision,recall,f1,support\n";
    for (const auto& report : reports) {
        for (std::size_t k = 0; k < classes.size(); ++k) {
            const int id = classes.id_of(k);
            const core::Activity* a = ctx.find_activity(id);
            const auto& s = report.per_class.at(id);
            out += report.scenario + "," + (a != nullptr ? a->label : std::to_string(id)) + "," +
                   fmt6(s.precision) + "," + fmt6(s.recall) + "," + fmt6(s.f1) + "," +
                   std::to_string(s.support) + "\n";
        }
    }
    return out;
}

std::string summary_grid_csv(const std::vector<ScenarioReport>& reports,
                             const ClassIndex& classes, const core::HouseContext& ctx) {
    const char* metrics[3] = {"Precision", "Recall", "F1-score"};
    std::string out = "Class";
    for (const char* metric : metrics) {
        for (const auto& report : reports) {
            out += std::string(",") + metric + " " + report.scenario;
        }
    }
    out += "\n";

    auto metric_value = [](const ClassScore& s, int metric) {
        return metric == 0 ? s.precision : metric == 1 ? s.recall : s.f1;
    };

    for (std::size_t k = 0; k < classes.size(); ++k) {
        const int id = classes.id_of(k);
        if (id == 0) {
            continue; // reserved Other: not a class row
        }
        const core::Activity* a = ctx.find_activity(id);
        out += a != nullptr ? a->label : std::to_string(id);
        for (int metric = 0; metric < 3; ++metric) {
            for (const auto& report : reports) {
                out += ",";
                if (!class_present(report, k)) {
                    out += "/";
                } else {
                    out += fmt_pct(metric_value(report.per_class.at(id), metric));
                }
            }
        }
        out += "\n";
    }

    auto aggregate_row = [&](const std::string& label, bool weighted) {
        std::string row = label;
        for (int metric = 0; metric < 3; ++metric) {
            for (const auto& report : reports) {
                const Ratios& r = weighted ? report.aggregates.weighted : report.aggregates.macro;
                const double v = metric == 0 ? r.precision : metric == 1 ? r.recall : r.f1;
                row += "," + fmt_pct(v);
            }
        }
        return row + "\n";
    };
    out += aggregate_row("Macro-Average", false);
    out += aggregate_row("Weighted-Average", true);
    return out;
}

std::string aggregates_json(const std::vector<ScenarioReport>& reports, const ClassIndex& classes,
                            const core::HouseContext& ctx) {
    ordered_json j = ordered_json::object();
    for (const auto& report : reports) {
        ordered_json scenario;
        ordered_json per_class = ordered_json::object();
        for (std::size_t k = 0; k < classes.size(); ++k) {
            const int id = classes.id_of(k);
            const core::Activity* a = ctx.find_activity(id);
            const auto& s = report.per_class.at(id);
            ordered_json cls;
            cls["label"] = a != nullptr ? a->label : std::to_string(id);
            cls["tp"] = s.tp;
            cls["fp"] = s.fp;
            cls["fn"] = s.fn;
            cls["precision"] = s.precision;
            cls["recall"] = s.recall;
            cls["f1"] = s.f1;
            cls["support"] = s.support;
            per_class[std::to_string(id)] = std::move(cls);
        }
        scenario["per_class"] = std::move(per_class);
        scenario["macro"] = ordered_json{{"precision", report.aggregates.macro.precision},
                                         {"recall", report.aggregates.macro.recall},
                                         {"f1", report.aggregates.macro.f1}};
        scenario["weighted"] = ordered_json{{"precision", report.aggregates.weighted.precision},
                                            {"recall", report.aggregates.weighted.recall},
                                            {"f1", report.aggregates.weighted.f1}};
        j[report.scenario] = std::move(scenario);
    }
    return j.dump(2) + "\n";
}

std::string confusion_csv(const ScenarioReport& report, const ClassIndex& classes,
                          const core::HouseContext& ctx) {
    auto label_of = [&](std::size_t index) -> std::string {
        if (index == report.confusion.unknown_index()) {
            return "Unknown";
        }
        const int id = classes.id_of(index);
        const core::Activity* a = ctx.find_activity(id);
        return a != nullptr ? a->label : std::to_string(id);
    };

    // Unknown leads, then catalog order
    std::vector<std::size_t> order;
    order.push_back(report.confusion.unknown_index());
    for (std::size_t k = 0; k < classes.size(); ++k) {
        order.push_back(k);
    }

    std::string out = "truth,pred,mass\n";
    for (std::size_t truth : order) {
        for (std::size_t pred : order) {
            out += label_of(truth) + "," + label_of(pred) + "," +
                   fmt6(report.confusion.at(truth, pred)) + "\n";
        }
    }
    return out;
}

} // namespace lahar::eval
