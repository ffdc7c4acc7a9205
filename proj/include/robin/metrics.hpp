#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robin/classifier.hpp"
#include "robin/errors.hpp"
#include "robin/interpreter.hpp"

namespace robin {

// Discrete Jaccard similarity of two index sets; 1 when both are empty.
inline double jaccard(const TopKSet& a, const TopKSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::vector<int> inter, uni;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(inter));
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(uni));
    if (uni.empty()) return 1.0;
    return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

using ExplainFn = std::function<TopKSet(const FeatureVector&)>;
using ImportanceFn = std::function<Eigen::VectorXd(const FeatureVector&)>;

struct FidelityReport {
    double fs_m = 0.0;
    double fs_a = 0.0;
    std::vector<bool> m_agreement;
    std::vector<bool> a_agreement;
    int k = 0;
    std::size_t num_examples = 0;
};

// FS-M: fraction of test examples whose prediction by M is unchanged when M
// sees only the top-k features. FS-A: the same fraction with the
// important-feature approximator in place of M on the masked vector.
inline FidelityReport fidelity(const ClassifierModel& m, const DenseNet& approx_s,
                               const ExplainFn& explain_fn,
                               const std::vector<FeatureVector>& test, int k) {
    if (test.empty()) throw MetricError("fidelity: empty test set");
    FidelityReport report;
    report.k = k;
    report.num_examples = test.size();
    std::size_t hits_m = 0, hits_a = 0;
    for (const auto& fv : test) {
        const int full_label = predict_label(m.net, fv.values);
        const TopKSet top = explain_fn(fv);
        const Eigen::VectorXd masked = hard_mask_to(fv.values, top);
        const bool agree_m = predict_label(m.net, masked) == full_label;
        const bool agree_a = predict_label(approx_s, masked) == full_label;
        report.m_agreement.push_back(agree_m);
        report.a_agreement.push_back(agree_a);
        hits_m += agree_m;
        hits_a += agree_a;
    }
    report.fs_m = static_cast<double>(hits_m) / static_cast<double>(test.size());
    report.fs_a = static_cast<double>(hits_a) / static_cast<double>(test.size());
    return report;
}

struct RobustnessReport {
    double mean_jaccard = 0.0;
    std::vector<double> per_pair;
    std::size_t num_pairs = 0;
    double survival_rate = 0.0;
};

// Mean Jaccard similarity between the top-k sets of originals and their
// surviving semantics-preserving variants.
inline RobustnessReport robustness(const ExplainFn& explain_fn,
                                   const std::vector<PerturbedSet>& test_sets, int k) {
    RobustnessReport report;
    std::size_t candidates = 0, survivors = 0;
    double total = 0.0;
    for (const auto& set : test_sets) {
        candidates += set.candidates_generated;
        survivors += set.variants.size();
        if (set.variants.empty()) continue;
        const TopKSet base = explain_fn(set.original);
        for (const auto& v : set.variants) {
            const double j = jaccard(base, explain_fn(v));
            report.per_pair.push_back(j);
            total += j;
        }
    }
    report.num_pairs = report.per_pair.size();
    if (report.num_pairs == 0)
        throw MetricError(
            "robustness: no surviving perturbed pairs; increase the candidate "
            "count m or decrease theta");
    report.mean_jaccard = total / static_cast<double>(report.num_pairs);
    report.survival_rate =
        candidates ? static_cast<double>(survivors) / static_cast<double>(candidates)
                   : 0.0;
    (void)k;
    return report;
}

struct AblationReport {
    std::vector<int> grid;
    std::vector<double> ad_q;
    double average_ad = 0.0;
    std::vector<double> retrained_accuracies;
};

inline std::vector<int> ablation_grid(int n) {
    std::vector<int> q;
    for (int j = 1; j <= 7; ++j) q.push_back(j * n / 8);
    return q;
}

inline std::map<std::string, std::vector<int>> least_important_masks(
    const ImportanceFn& importance, const std::vector<FeatureVector>& examples, int q) {
    std::map<std::string, std::vector<int>> masks;
    for (const auto& fv : examples)
        masks[fv.example_id] = bottom_q_indices(importance(fv), q);
    return masks;
}

using RetrainFn = std::function<ClassifierModel(
    const std::map<std::string, std::vector<int>>& masks, int q)>;

// AD_q across the 7-point grid. For each q the classifier is retrained with
// each training example's q least-important features removed, and both
// agreement terms are evaluated on the test split's masked vectors.
inline AblationReport ablation_curve(const ClassifierModel& m,
                                     const ImportanceFn& importance,
                                     const std::vector<FeatureVector>& train,
                                     const std::vector<FeatureVector>& test,
                                     const std::vector<int>& q_grid,
                                     const RetrainFn& retrain) {
    const std::vector<int> expected = ablation_grid(m.featurizer.n);
    if (q_grid != expected)
        throw ConfigError("ablation grid must be {n/8, ..., 7n/8}");
    if (test.empty()) throw MetricError("ablation_curve: empty test set");

    AblationReport report;
    report.grid = q_grid;
    for (int q : q_grid) {
        ClassifierModel mq;
        try {
            mq = retrain(least_important_masks(importance, train, q), q);
        } catch (const TrainError& e) {
            throw TrainError("ablation retraining failed at q=" + std::to_string(q) +
                             ": " + e.what());
        }
        std::size_t term1 = 0, term2 = 0;
        for (const auto& fv : test) {
            const int full_label = predict_label(m.net, fv.values);
            Eigen::VectorXd masked = fv.values;
            for (int idx : bottom_q_indices(importance(fv), q)) masked[idx] = 0.0;
            term1 += predict_label(m.net, masked) == full_label;
            term2 += predict_label(mq.net, masked) == full_label;
        }
        report.ad_q.push_back(
            (static_cast<double>(term1) - static_cast<double>(term2)) /
            static_cast<double>(test.size()));
        report.retrained_accuracies.push_back(mq.train_accuracy);
    }
    double total = 0.0;
    for (double v : report.ad_q) total += v;
    report.average_ad = total / static_cast<double>(report.ad_q.size());
    return report;
}

}  // namespace robin
