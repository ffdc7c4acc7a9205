#include <gtest/gtest.h>

#include <set>

#include "robin/baselines.hpp"
#include "robin/classifier.hpp"
#include "robin/corpus.hpp"
#include "robin/metrics.hpp"
#include "robin/pipeline.hpp"
#include "robin/rng.hpp"

using namespace robin;

namespace {

struct Fixture {
    Corpus train, val, test;
    ClassifierModel classifier;
    std::vector<FeatureVector> train_features, test_features;
    std::vector<PerturbedSet> test_sets;

    static Fixture make(std::uint64_t seed) {
        CorpusSpec spec;
        spec.num_classes = 3;
        spec.examples_per_class = 20;
        Corpus corpus = generate_corpus(spec, seed);
        SplitSpec ss;
        ss.seed = seed + 1;
        CorpusSplit split = split_corpus(corpus, ss);
        Fixture f;
        f.train = std::move(split.train);
        f.val = std::move(split.val);
        f.test = std::move(split.test);
        Featurizer featurizer = fit_featurizer(f.train, 64);
        ClassifierConfig ccfg;
        ccfg.max_epochs = 40;
        f.classifier = train_classifier(f.train, f.val, featurizer, ccfg, seed + 2);
        f.train_features = featurize_all(featurizer, f.train);
        f.test_features = featurize_all(featurizer, f.test);
        f.test_sets =
            pipeline::build_perturbed_sets(f.classifier, f.test, 2, 2, seed + 3);
        return f;
    }
};

}  // namespace

TEST(JaccardTest, KnownValues) {
    EXPECT_DOUBLE_EQ(jaccard({1, 2, 3}, {1, 2, 3}), 1.0);
    EXPECT_DOUBLE_EQ(jaccard({1, 2, 3}, {4, 5, 6}), 0.0);
    EXPECT_DOUBLE_EQ(jaccard({1, 2, 3}, {1, 2, 4}), 0.5);
    EXPECT_DOUBLE_EQ(jaccard({}, {}), 1.0);
    EXPECT_DOUBLE_EQ(jaccard({1}, {}), 0.0);
}

TEST(JaccardTest, SymmetricAndMatchesSoftOnIndicators) {
    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        TopKSet a, b;
        Eigen::VectorXd pa = Eigen::VectorXd::Zero(20), pb = Eigen::VectorXd::Zero(20);
        for (int i = 0; i < 20; ++i) {
            if (rng.next_index(2)) {
                a.push_back(i);
                pa[i] = 1.0;
            }
            if (rng.next_index(2)) {
                b.push_back(i);
                pb[i] = 1.0;
            }
        }
        EXPECT_DOUBLE_EQ(jaccard(a, b), jaccard(b, a));
        EXPECT_DOUBLE_EQ(jaccard(a, b), soft_jaccard(pa, pb));
    }
}

TEST(FidelityTest, AllFeaturesGivesPerfectFsM) {
    Fixture f = Fixture::make(301);
    ExplainFn all = [](const FeatureVector& fv) {
        TopKSet out;
        for (int i = 0; i < fv.values.size(); ++i) out.push_back(i);
        return out;
    };
    FidelityReport r =
        fidelity(f.classifier, f.classifier.net, all, f.test_features, 64);
    EXPECT_DOUBLE_EQ(r.fs_m, 1.0);
    EXPECT_DOUBLE_EQ(r.fs_a, 1.0);  // the mask is the identity here
}

TEST(FidelityTest, ConstantApproximatorGivesClassFrequency) {
    Fixture f = Fixture::make(307);
    // An approximator whose output is constant: always class 1.
    DenseNet constant = make_dense_net({64, 3}, OutputHead::Softmax, 1);
    for (auto& w : constant.weights) w.setZero();
    for (auto& b : constant.biases) b.setZero();
    constant.biases[0][1] = 5.0;

    ExplainFn topk = [&](const FeatureVector& fv) {
        return random_explain(fv, 10, 5);
    };
    FidelityReport r = fidelity(f.classifier, constant, topk, f.test_features, 10);
    std::size_t class1 = 0;
    for (const auto& fv : f.test_features)
        class1 += predict_label(f.classifier.net, fv.values) == 1;
    EXPECT_DOUBLE_EQ(r.fs_a,
                     static_cast<double>(class1) / f.test_features.size());
}

TEST(FidelityTest, MatchesBruteForceRecount) {
    Fixture f = Fixture::make(311);
    const std::uint64_t seed = 17;
    ExplainFn topk = [&](const FeatureVector& fv) {
        return random_explain(fv, 10, seed);
    };
    FidelityReport r =
        fidelity(f.classifier, f.classifier.net, topk, f.test_features, 10);

    // Independent recount, one example at a time.
    std::size_t hits_m = 0, hits_a = 0;
    for (const auto& fv : f.test_features) {
        const int full = predict_label(f.classifier.net, fv.values);
        Eigen::VectorXd masked = Eigen::VectorXd::Zero(64);
        for (int idx : random_explain(fv, 10, seed)) masked[idx] = fv.values[idx];
        hits_m += predict_label(f.classifier.net, masked) == full;
        hits_a += predict_label(f.classifier.net, masked) == full;
    }
    EXPECT_DOUBLE_EQ(r.fs_m, static_cast<double>(hits_m) / f.test_features.size());
    EXPECT_DOUBLE_EQ(r.fs_a, static_cast<double>(hits_a) / f.test_features.size());
}

TEST(RobustnessTest, ConstantExplainerScoresOne) {
    Fixture f = Fixture::make(313);
    ExplainFn constant = [](const FeatureVector&) { return TopKSet{1, 2, 3}; };
    RobustnessReport r = robustness(constant, f.test_sets, 3);
    EXPECT_DOUBLE_EQ(r.mean_jaccard, 1.0);
    EXPECT_GT(r.num_pairs, 0u);
    EXPECT_GT(r.survival_rate, 0.0);
}

TEST(RobustnessTest, HandBuiltTwoPairCase) {
    // Two pairs with Jaccards 1.0 and 0.5.
    PerturbedSet s1, s2;
    s1.original = {Eigen::VectorXd::Ones(4), "o1"};
    s1.variants = {{Eigen::VectorXd::Ones(4), "o1+p0"}};
    s1.candidates_generated = 1;
    s2.original = {Eigen::VectorXd::Ones(4), "o2"};
    s2.variants = {{Eigen::VectorXd::Ones(4), "o2+p0"}};
    s2.candidates_generated = 1;
    ExplainFn fn = [](const FeatureVector& fv) {
        if (fv.example_id == "o2+p0") return TopKSet{1, 2, 4};
        return TopKSet{1, 2, 3};
    };
    RobustnessReport r = robustness(fn, {s1, s2}, 3);
    EXPECT_DOUBLE_EQ(r.mean_jaccard, 0.75);
    EXPECT_EQ(r.num_pairs, 2u);
}

TEST(RobustnessTest, RandomBaselineNearMonteCarloFloor) {
    Fixture f = Fixture::make(317);
    // Independent seeds per example id: originals and variants get unrelated
    // subsets, so the mean Jaccard approaches the random floor for n=64, k=8.
    ExplainFn rnd = [](const FeatureVector& fv) { return random_explain(fv, 8, 23); };
    RobustnessReport r = robustness(rnd, f.test_sets, 8);

    Rng rng(99);
    double oracle = 0.0;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        auto a = rng.sample_without_replacement(64, 8);
        auto b = rng.sample_without_replacement(64, 8);
        std::set<std::size_t> sa(a.begin(), a.end());
        std::size_t inter = 0;
        for (auto x : b) inter += sa.count(x);
        oracle += static_cast<double>(inter) / static_cast<double>(16 - inter);
    }
    oracle /= trials;
    EXPECT_NEAR(r.mean_jaccard, oracle, 0.04);  // few dozen pairs: loose band
}

TEST(RobustnessTest, NoSurvivingPairsIsAnError) {
    PerturbedSet s;
    s.original = {Eigen::VectorXd::Ones(4), "o"};
    s.candidates_generated = 4;
    ExplainFn fn = [](const FeatureVector&) { return TopKSet{0}; };
    try {
        robustness(fn, {s}, 1);
        FAIL() << "expected MetricError";
    } catch (const MetricError& e) {
        EXPECT_NE(std::string(e.what()).find("increase"), std::string::npos);
    }
}

TEST(AblationTest, ReusingTheBaseModelGivesZeroCurve) {
    Fixture f = Fixture::make(331);
    ImportanceFn imp = [](const FeatureVector& fv) {
        return random_importance(fv.example_id, 64, 3).scores;
    };
    RetrainFn reuse = [&](const std::map<std::string, std::vector<int>>&, int) {
        return f.classifier;
    };
    AblationReport r = ablation_curve(f.classifier, imp, f.train_features,
                                      f.test_features, ablation_grid(64), reuse);
    ASSERT_EQ(r.ad_q.size(), 7u);
    for (double v : r.ad_q) EXPECT_DOUBLE_EQ(v, 0.0);
    EXPECT_DOUBLE_EQ(r.average_ad, 0.0);
}

TEST(AblationTest, PerQValuesMatchIndependentRecount) {
    Fixture f = Fixture::make(337);
    ImportanceFn imp = [](const FeatureVector& fv) {
        return random_importance(fv.example_id, 64, 11).scores;
    };
    RetrainFn retrain = [&](const std::map<std::string, std::vector<int>>& masks,
                            int q) {
        return retrain_ablated(f.classifier, f.train, masks, q, 5);
    };
    AblationReport r = ablation_curve(f.classifier, imp, f.train_features,
                                      f.test_features, ablation_grid(64), retrain);

    // Recount every term with retrained models rebuilt from the same masks.
    for (std::size_t qi = 0; qi < r.grid.size(); ++qi) {
        const int q = r.grid[qi];
        ClassifierModel mq = retrain_ablated(
            f.classifier, f.train,
            least_important_masks(imp, f.train_features, q), q, 5);
        int term1 = 0, term2 = 0;
        for (const auto& fv : f.test_features) {
            const int full = predict_label(f.classifier.net, fv.values);
            Eigen::VectorXd masked = fv.values;
            for (int idx : bottom_q_indices(imp(fv), q)) masked[idx] = 0.0;
            term1 += predict_label(f.classifier.net, masked) == full;
            term2 += predict_label(mq.net, masked) == full;
        }
        const double expected =
            static_cast<double>(term1 - term2) / f.test_features.size();
        EXPECT_DOUBLE_EQ(r.ad_q[qi], expected) << "q=" << q;
        EXPECT_GE(r.ad_q[qi], -1.0);
        EXPECT_LE(r.ad_q[qi], 1.0);
    }
}

TEST(AblationTest, GridMustBeCanonical) {
    Fixture f = Fixture::make(347);
    ImportanceFn imp = [](const FeatureVector& fv) {
        return random_importance(fv.example_id, 64, 3).scores;
    };
    RetrainFn reuse = [&](const std::map<std::string, std::vector<int>>&, int) {
        return f.classifier;
    };
    EXPECT_THROW(ablation_curve(f.classifier, imp, f.train_features, f.test_features,
                                {8, 16, 24}, reuse),
                 ConfigError);
}

TEST(MetricInvarianceTest, PermutingTestSetLeavesMetricsUnchanged) {
    Fixture f = Fixture::make(349);
    ExplainFn topk = [](const FeatureVector& fv) { return random_explain(fv, 8, 7); };
    FidelityReport a =
        fidelity(f.classifier, f.classifier.net, topk, f.test_features, 8);
    std::vector<FeatureVector> reversed(f.test_features.rbegin(),
                                        f.test_features.rend());
    FidelityReport b = fidelity(f.classifier, f.classifier.net, topk, reversed, 8);
    EXPECT_DOUBLE_EQ(a.fs_m, b.fs_m);
    EXPECT_DOUBLE_EQ(a.fs_a, b.fs_a);
}
