#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "lahar/core/types.hpp"

namespace lahar::eval {

/// T x K binary matrix: entry (t, k) = 1 iff catalog class k is ongoing at
/// second t. Rows may be all-zero (Unknown second) or multi-hot (overlapping
/// activities union together).
class SecondMatrix {
public:
    SecondMatrix(std::size_t seconds, std::size_t classes)
        : seconds_(seconds), classes_(classes), cells_(seconds * classes, 0) {}

    std::size_t seconds() const { return seconds_; }
    std::size_t classes() const { return classes_; }

    std::uint8_t at(std::size_t t, std::size_t k) const { return cells_[t * classes_ + k]; }
    void set(std::size_t t, std::size_t k, std::uint8_t v) { cells_[t * classes_ + k] = v; }

private:
    std::size_t seconds_;
    std::size_t classes_;
    std::vector<std::uint8_t> cells_;
};

/// Maps catalog activity ids to matrix columns (catalog order).
class ClassIndex {
public:
    explicit ClassIndex(const core::HouseContext& ctx);
    explicit ClassIndex(std::vector<int> ids);

    std::size_t size() const { return ids_.size(); }
    const std::vector<int>& ids() const { return ids_; }
    int id_of(std::size_t column) const { return ids_[column]; }
    int column_of(int id) const; // -1 when absent

private:
    std::vector<int> ids_;
    std::map<int, int> columns_;
};

/// One-hot/multi-hot encoding of a timeline over a span: (t, k) = 1 iff
/// class k is ongoing at second t; overlaps union.
SecondMatrix encode(const core::Timeline& timeline, core::TimeSpan span,
                    const ClassIndex& classes);

SecondMatrix encode_truth(const std::vector<core::TruthInterval>& truth, core::TimeSpan span,
                          const ClassIndex& classes);

struct ClassCounts {
    std::int64_t tp{0};
    std::int64_t fp{0};
    std::int64_t fn{0};

    std::int64_t support() const { return tp + fn; }
    ClassCounts& operator+=(const ClassCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
};

struct Ratios {
    double precision{0.0};
    double recall{0.0};
    double f1{0.0};
};

/// S = elementwise product of pred and truth; per class k:
/// tp = sum S, fp = sum (pred - S), fn = sum (truth - S).
/// Throws ShapeMismatch when dimensions differ.
std::vector<ClassCounts> score(const SecondMatrix& pred, const SecondMatrix& truth);

/// Undefined ratios (0/0) score as 0.
Ratios ratios_from_counts(const ClassCounts& c);

struct AggregateScores {
    Ratios macro;
    Ratios weighted;
    std::vector<std::size_t> included_columns;
};

/// Macro: unweighted mean over classes with (tp+fn)>0 or (tp+fp)>0; weighted:
/// support-weighted mean. Classes absent from both sides are excluded.
/// `eligible` restricts which columns may enter the averages at all.
AggregateScores aggregate(const std::vector<ClassCounts>& counts,
                          const std::vector<std::size_t>& eligible);

/// (K+1)^2 confusion with Unknown as the last row/column. Per second, each
/// active truth class g credits (g,g) when also predicted, else splits 1
/// across the predicted classes (1/|pred|), or lands in (g, Unknown) when
/// nothing was predicted; seconds with empty truth fill the Unknown row the
/// same way. Total mass = sum_t max(1, active truth classes at t).
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t classes)
        : classes_(classes), cells_((classes + 1) * (classes + 1), 0.0) {}

    std::size_t classes() const { return classes_; }
    std::size_t unknown_index() const { return classes_; }
    double at(std::size_t truth, std::size_t pred) const {
        return cells_[truth * (classes_ + 1) + pred];
    }
    void add(std::size_t truth, std::size_t pred, double mass) {
        cells_[truth * (classes_ + 1) + pred] += mass;
    }
    ConfusionMatrix& operator+=(const ConfusionMatrix& o);
    double total_mass() const;

private:
    std::size_t classes_;
    std::vector<double> cells_;
};

ConfusionMatrix confusion(const SecondMatrix& pred, const SecondMatrix& truth);

} // namespace lahar::eval
