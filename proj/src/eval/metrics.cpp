#include "lahar/eval/metrics.hpp"

#include <algorithm>

#include "lahar/core/errors.hpp"

namespace lahar::eval {

ClassIndex::ClassIndex(const core::HouseContext& ctx) {
    for (const auto& a : ctx.activity_catalog) {
        ids_.push_back(a.id);
    }
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        columns_[ids_[i]] = static_cast<int>(i);
    }
}

ClassIndex::ClassIndex(std::vector<int> ids) : ids_(std::move(ids)) {
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        columns_[ids_[i]] = static_cast<int>(i);
    }
}

int ClassIndex::column_of(int id) const {
    auto it = columns_.find(id);
    return it == columns_.end() ? -1 : it->second;
}

namespace {

void mark_interval(SecondMatrix& m, core::TimeSpan span, core::Timestamp start,
                   core::Timestamp end, int column) {
    if (column < 0) {
        return;
    }
    const std::int64_t lo = std::max(start.value, span.start.value);
    const std::int64_t hi = std::min(end.value, span.end.value);
    for (std::int64_t t = lo; t < hi; ++t) {
        m.set(static_cast<std::size_t>(t - span.start.value), static_cast<std::size_t>(column), 1);
    }
}

} // namespace

SecondMatrix encode(const core::Timeline& timeline, core::TimeSpan span,
                    const ClassIndex& classes) {
    SecondMatrix m(static_cast<std::size_t>(span.length()), classes.size());
    for (const auto& e : timeline.entries) {
        mark_interval(m, span, e.start, e.end, classes.column_of(e.activity));
    }
    return m;
}

SecondMatrix encode_truth(const std::vector<core::TruthInterval>& truth, core::TimeSpan span,
                          const ClassIndex& classes) {
    SecondMatrix m(static_cast<std::size_t>(span.length()), classes.size());
    for (const auto& iv : truth) {
        mark_interval(m, span, iv.start, iv.end, classes.column_of(iv.activity));
    }
    return m;
}

std::vector<ClassCounts> score(const SecondMatrix& pred, const SecondMatrix& truth) {
    if (pred.seconds() != truth.seconds() || pred.classes() != truth.classes()) {
        throw ShapeMismatch("pred and truth matrices have different shapes");
    }
    std::vector<ClassCounts> counts(pred.classes());
    for (std::size_t t = 0; t < pred.seconds(); ++t) {
        for (std::size_t k = 0; k < pred.classes(); ++k) {
            const std::uint8_t p = pred.at(t, k);
            const std::uint8_t g = truth.at(t, k);
            const std::uint8_t s = static_cast<std::uint8_t>(p * g);
            counts[k].tp += s;
            counts[k].fp += p - s;
            counts[k].fn += g - s;
        }
    }
    return counts;
}

Ratios ratios_from_counts(const ClassCounts& c) {
    Ratios r;
    if (c.tp + c.fp > 0) {
        r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    }
    if (c.tp + c.fn > 0) {
        r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    }
    if (r.precision + r.recall > 0) {
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    }
    return r;
}

AggregateScores aggregate(const std::vector<ClassCounts>& counts,
                          const std::vector<std::size_t>& eligible) {
    AggregateScores agg;
    double support_total = 0.0;
    double macro_p = 0.0, macro_r = 0.0, macro_f1 = 0.0;
    double weighted_p = 0.0, weighted_r = 0.0, weighted_f1 = 0.0;

    for (std::size_t k : eligible) {
        const ClassCounts& c = counts[k];
        if (c.tp + c.fn == 0 && c.tp + c.fp == 0) {
            continue; // absent from both sides
        }
        const Ratios r = ratios_from_counts(c);
        agg.included_columns.push_back(k);
        macro_p += r.precision;
        macro_r += r.recall;
        macro_f1 += r.f1;
        const double support = static_cast<double>(c.support());
        support_total += support;
        weighted_p += r.precision * support;
        weighted_r += r.recall * support;
        weighted_f1 += r.f1 * support;
    }

    const double n = static_cast<double>(agg.included_columns.size());
    if (n > 0) {
        agg.macro = Ratios{macro_p / n, macro_r / n, macro_f1 / n};
    }
    if (support_total > 0) {
        agg.weighted =
            Ratios{weighted_p / support_total, weighted_r / support_total,
                   weighted_f1 / support_total};
    }
    return agg;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
    if (o.classes_ != classes_) {
        throw ShapeMismatch("confusion matrices have different sizes");
    }
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        cells_[i] += o.cells_[i];
    }
    return *this;
}

double ConfusionMatrix::total_mass() const {
    double total = 0.0;
    for (double v : cells_) {
        total += v;
    }
    return total;
}

ConfusionMatrix confusion(const SecondMatrix& pred, const SecondMatrix& truth) {
    if (pred.seconds() != truth.seconds() || pred.classes() != truth.classes()) {
        throw ShapeMismatch("pred and truth matrices have different shapes");
    }
    const std::size_t K = pred.classes();
    ConfusionMatrix cm(K);
    const std::size_t unknown = cm.unknown_index();

    std::vector<std::size_t> active_pred;
    active_pred.reserve(K);
    for (std::size_t t = 0; t < pred.seconds(); ++t) {
        active_pred.clear();
        for (std::size_t k = 0; k < K; ++k) {
            if (pred.at(t, k) != 0) {
                active_pred.push_back(k);
            }
        }
        bool any_truth = false;
        for (std::size_t g = 0; g < K; ++g) {
            if (truth.at(t, g) == 0) {
                continue;
            }
            any_truth = true;
            if (pred.at(t, g) != 0) {
                cm.add(g, g, 1.0);
            } else if (!active_pred.empty()) {
                const double fraction = 1.0 / static_cast<double>(active_pred.size());
                for (std::size_t p : active_pred) {
                    cm.add(g, p, fraction);
                }
            } else {
                cm.add(g, unknown, 1.0);
            }
        }
        if (!any_truth) {
            if (!active_pred.empty()) {
                const double fraction = 1.0 / static_cast<double>(active_pred.size());
                for (std::size_t p : active_pred) {
                    cm.add(unknown, p, fraction);
                }
            } else {
                cm.add(unknown, unknown, 1.0);
            }
        }
    }
    return cm;
}

} // namespace lahar::eval
