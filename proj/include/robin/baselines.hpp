#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

#include "robin/classifier.hpp"
#include "robin/features.hpp"
#include "robin/interpreter.hpp"
#include "robin/rng.hpp"

namespace robin {

// Uniform random scores per feature, deterministic per (example id, seed).
// The top-k of i.i.d. uniforms is a uniform random k-subset, and the full
// ordering doubles as the least-important ranking for the ablation curve.
inline ImportanceVector random_importance(const std::string& example_id, int n,
                                          std::uint64_t seed) {
    Rng rng(derive_seed(seed, "random-explain", fnv1a(example_id)));
    ImportanceVector iv;
    iv.example_id = example_id;
    iv.scores.resize(n);
    for (int i = 0; i < n; ++i) iv.scores[i] = rng.next_double();
    return iv;
}

inline TopKSet random_explain(const FeatureVector& x, int k, std::uint64_t seed) {
    ImportanceVector iv =
        random_importance(x.example_id, static_cast<int>(x.values.size()), seed);
    return top_k_indices(iv.scores, k);
}

struct OcclusionResult {
    ImportanceVector importance;  // scores rescaled into (0, 1)
    Eigen::VectorXd raw_scores;   // prediction-probability drops
    TopKSet top;
};

// Occlusion saliency: score_j is the drop in the predicted class probability
// when coordinate j is zeroed. Exactly n+1 forward passes per example.
inline OcclusionResult occlusion_explain_fn(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& predict_proba,
    const FeatureVector& x, int k) {
    const int n = static_cast<int>(x.values.size());
    Eigen::VectorXd base = predict_proba(x.values);
    const int label = argmax_lowest(base);
    const double p0 = base[label];

    OcclusionResult out;
    out.raw_scores.resize(n);
    Eigen::VectorXd probe = x.values;
    for (int j = 0; j < n; ++j) {
        const double saved = probe[j];
        probe[j] = 0.0;
        out.raw_scores[j] = p0 - predict_proba(probe)[label];
        probe[j] = saved;
    }

    const double lo = out.raw_scores.minCoeff();
    const double hi = out.raw_scores.maxCoeff();
    out.importance.example_id = x.example_id;
    out.importance.scores.resize(n);
    if (hi - lo < 1e-300) {
        out.importance.scores.setConstant(0.5);
    } else {
        // Affine map into (0, 1), kept strictly inside the open interval.
        out.importance.scores =
            ((out.raw_scores.array() - lo) / (hi - lo) * 0.998 + 0.001).matrix();
    }
    out.top = top_k_indices(out.raw_scores, k);
    return out;
}

inline OcclusionResult occlusion_explain(const ClassifierModel& m,
                                         const FeatureVector& x, int k) {
    return occlusion_explain_fn(
        [&m](const Eigen::VectorXd& v) { return forward(m.net, v); }, x, k);
}

}  // namespace robin
