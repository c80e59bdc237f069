// Brute-force per-example metrics, written independently of the library:
// everything is recomputed from the raw label vectors with fresh loops, so
// agreement is meaningful. Values are percentages, like the library's.
#pragma once

#include <vector>

namespace testsupport {

struct OracleScores {
    double accuracy = 0.0;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
};

/// Weighted-average metrics over 0/1 label vectors (1 = positive class).
inline OracleScores oracle_weighted(const std::vector<int>& predicted,
                                    const std::vector<int>& gold) {
    const double n = double(predicted.size());
    double correct = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        if (predicted[i] == gold[i]) correct += 1.0;
    }
    OracleScores scores;
    scores.accuracy = 100.0 * correct / n;
    for (int cls : {1, 0}) {
        double tp = 0.0, predicted_cls = 0.0, gold_cls = 0.0;
        for (size_t i = 0; i < predicted.size(); ++i) {
            if (predicted[i] == cls) predicted_cls += 1.0;
            if (gold[i] == cls) gold_cls += 1.0;
            if (predicted[i] == cls && gold[i] == cls) tp += 1.0;
        }
        const double p = predicted_cls > 0.0 ? tp / predicted_cls : 0.0;
        const double r = gold_cls > 0.0 ? tp / gold_cls : 0.0;
        const double f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
        const double weight = gold_cls / n;
        scores.precision += 100.0 * p * weight;
        scores.recall += 100.0 * r * weight;
        scores.f1 += 100.0 * f * weight;
    }
    return scores;
}

}  // namespace testsupport
