// Binary classification metrics: confusion counts, per-class
// precision/recall/F1, weighted and macro averaging, and an aligned
// comparison table for scoring several models on the same test set.
// All reported metrics are percentages in [0, 100].
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reactsent/annotate.hpp"

namespace reactsent {

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Averaging { Weighted, Macro };

inline std::string_view averaging_name(Averaging a) {
    return a == Averaging::Weighted ? "weighted" : "macro";
}

inline Averaging averaging_from_name(std::string_view name) {
    if (name == "weighted") return Averaging::Weighted;
    if (name == "macro") return Averaging::Macro;
    throw EvalError("unknown averaging: '" + std::string(name) + "'");
}

/// Counts with Positive as the positive class.
struct ConfusionMatrix {
    size_t tp = 0;
    size_t fp = 0;
    size_t fn = 0;
    size_t tn = 0;

    size_t total() const { return tp + fp + fn + tn; }
};

inline ConfusionMatrix confusion(std::span<const SentimentLabel> predicted,
                                 std::span<const SentimentLabel> gold) {
    if (gold.size() != predicted.size()) {
        throw EvalError("predicted and gold label counts differ: " +
                        std::to_string(predicted.size()) + " vs " +
                        std::to_string(gold.size()));
    }
    if (gold.empty()) {
        throw EvalError("cannot score an empty label set");
    }
    ConfusionMatrix cm;
    for (size_t i = 0; i < gold.size(); ++i) {
        const bool g = gold[i] == SentimentLabel::Positive;
        const bool p = predicted[i] == SentimentLabel::Positive;
        if (g && p) ++cm.tp;
        else if (!g && p) ++cm.fp;
        else if (g && !p) ++cm.fn;
        else ++cm.tn;
    }
    return cm;
}

/// Per-class scores as percentages; every 0/0 ratio is defined as 0.
struct ClassMetrics {
    size_t support = 0;  // gold instances of this class
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

namespace detail {

inline double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

inline ClassMetrics class_metrics(size_t tp, size_t fp, size_t fn) {
    const double p = safe_ratio(double(tp), double(tp + fp));
    const double r = safe_ratio(double(tp), double(tp + fn));
    ClassMetrics m;
    m.support = tp + fn;
    m.precision = 100.0 * p;
    m.recall = 100.0 * r;
    m.f1 = 100.0 * safe_ratio(2.0 * p * r, p + r);
    return m;
}

}  // namespace detail

struct MetricsReport {
    std::string model;
    Averaging averaging = Averaging::Weighted;
    size_t total = 0;
    double accuracy = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    ClassMetrics positive;
    ClassMetrics negative;
};

/// Scores a confusion matrix. Weighted averages weight each class by its
/// gold support; macro is the unweighted two-class mean.
inline MetricsReport metrics(const ConfusionMatrix& cm,
                             Averaging averaging = Averaging::Weighted,
                             std::string model_name = {}) {
    if (cm.total() == 0) {
        throw EvalError("cannot score an empty confusion matrix");
    }
    MetricsReport report;
    report.model = std::move(model_name);
    report.averaging = averaging;
    report.total = cm.total();
    report.accuracy = 100.0 * double(cm.tp + cm.tn) / double(report.total);
    report.positive = detail::class_metrics(cm.tp, cm.fp, cm.fn);
    // The negative class's view swaps the roles of the two error cells.
    report.negative = detail::class_metrics(cm.tn, cm.fn, cm.fp);
    auto combine = [&](double pos, double neg) {
        if (averaging == Averaging::Macro) return (pos + neg) / 2.0;
        return (pos * double(report.positive.support) + neg * double(report.negative.support)) /
               double(report.total);
    };
    report.precision = combine(report.positive.precision, report.negative.precision);
    report.f1 = combine(report.positive.f1, report.negative.f1);
    // Support-weighted recall telescopes to (tp+tn)/total, i.e. accuracy;
    // assigning it keeps that identity exact in floating point.
    report.recall = averaging == Averaging::Weighted
                        ? report.accuracy
                        : combine(report.positive.recall, report.negative.recall);
    return report;
}

inline MetricsReport score_labels(std::span<const SentimentLabel> predicted,
                                  std::span<const SentimentLabel> gold,
                                  Averaging averaging = Averaging::Weighted,
                                  std::string model_name = {}) {
    return metrics(confusion(predicted, gold), averaging, std::move(model_name));
}

/// Renders a percentage with two decimals ("83.59").
inline std::string format_pct(double pct) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", pct);
    return buf;
}

/// Orders reports best-first: by F1 descending, ties broken by accuracy
/// descending, then by model name so the order is total.
inline std::vector<MetricsReport> rank_reports(std::vector<MetricsReport> reports) {
    std::stable_sort(reports.begin(), reports.end(),
                     [](const MetricsReport& a, const MetricsReport& b) {
                         if (a.f1 != b.f1) return a.f1 > b.f1;
                         if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
                         return a.model < b.model;
                     });
    return reports;
}

/// Column-aligned text table of ranked reports, percentages to two
/// decimals.
inline std::string render_comparison(const std::vector<MetricsReport>& reports) {
    if (reports.empty()) {
        throw EvalError("comparison table needs at least one report");
    }
    std::vector<MetricsReport> ranked = rank_reports(reports);
    const std::vector<std::string> header = {"Model", "Accuracy", "Recall", "Precision", "F1"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(header);
    for (const MetricsReport& r : ranked) {
        cells.push_back({r.model, format_pct(r.accuracy), format_pct(r.recall),
                         format_pct(r.precision), format_pct(r.f1)});
    }
    std::vector<size_t> widths(header.size(), 0);
    for (const auto& row : cells) {
        for (size_t c = 0; c < row.size(); ++c) {
            widths[c] = std::max(widths[c], row[c].size());
        }
    }
    std::string out;
    for (const auto& row : cells) {
        for (size_t c = 0; c < row.size(); ++c) {
            if (c > 0) out += "  ";
            const size_t pad = widths[c] - row[c].size();
            if (c == 0) {
                out += row[c];
                out.append(pad, ' ');
            } else {
                out.append(pad, ' ');
                out += row[c];
            }
        }
        // Trailing spaces after the name column would be invisible noise.
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

}  // namespace reactsent
