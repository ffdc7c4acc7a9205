#pragma once

#include <cmath>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robin/classifier.hpp"
#include "robin/errors.hpp"
#include "robin/features.hpp"
#include "robin/nn.hpp"
#include "robin/rng.hpp"
#include "robin/transforms.hpp"

namespace robin {

// ---------------------------------------------------------------------------
// Core value types
// ---------------------------------------------------------------------------

struct ImportanceVector {
    Eigen::VectorXd scores;
    std::string example_id;
};

using TopKSet = std::vector<int>;  // sorted ascending

// Highest k scores; ties broken toward the lower index.
inline TopKSet top_k_indices(const Eigen::VectorXd& scores, int k) {
    std::vector<int> idx(scores.size());
    for (int i = 0; i < scores.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(k)));
    std::sort(idx.begin(), idx.end());
    return idx;
}

// Lowest q scores; ties broken toward the lower index.
inline std::vector<int> bottom_q_indices(const Eigen::VectorXd& scores, int q) {
    std::vector<int> idx(scores.size());
    for (int i = 0; i < scores.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] < scores[b];
        return a < b;
    });
    idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(q)));
    std::sort(idx.begin(), idx.end());
    return idx;
}

// An original example with its surviving prediction-preserving variants.
struct PerturbedSet {
    CodeExample original_example;
    FeatureVector original;
    std::vector<CodeExample> variant_examples;
    std::vector<FeatureVector> variants;
    std::size_t candidates_generated = 0;
};

struct MixedExample {
    Eigen::VectorXd x_mix;
    Eigen::VectorXd y_mix;
    double lambda = 1.0;
};

enum class TrainPhase { Approximators, Interpreter, Mixup };

inline const char* phase_name(TrainPhase p) {
    switch (p) {
        case TrainPhase::Approximators: return "approximators";
        case TrainPhase::Interpreter: return "interpreter";
        case TrainPhase::Mixup: return "mixup";
    }
    return "?";
}

struct LossBreakdown {
    int round = 0;
    TrainPhase phase = TrainPhase::Approximators;
    double l_s = 0.0;
    double l_u = 0.0;
    double l_diff = 0.0;
};

// Interpreter E plus the two approximators. The approximators share the
// classifier's architecture and start from its trained parameters; E maps a
// feature vector to per-feature importance scores.
struct InterpreterModel {
    DenseNet interpreter;
    DenseNet approx_s;
    DenseNet approx_u;
    int k = 10;
    int num_classes = 0;
    std::vector<LossBreakdown> history;
};

struct InterpreterTrainConfig {
    std::vector<int> hidden = {128, 64};
    int max_rounds = 300;
    double convergence_tol = 1e-4;
    int convergence_patience = 10;
    int batch_size = 32;
    double interpreter_learning_rate = 1e-2;
    double approx_learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
    bool factor1 = true;  // Jaccard discrepancy term in the interpreter loss
    bool factor2 = true;  // mixup optimization phase
    double l_diff_weight = 1.0;
    int mixup_epochs = 30;
    double mixup_alpha = 1.0;
    // Step III fine-tunes a converged interpreter; scale-free Adam steps primarily
    // scramble the score ordering it is meant to polish, so the phase defaults
    // to plain SGD.
    OptimizerKind mixup_optimizer = OptimizerKind::Sgd;
    double mixup_learning_rate = 1e-3;
    double loss_cap = 0.0;  // 0 = ln(C) + 2
    OutputHead interpreter_head = OutputHead::Sigmoid;
    int k = 10;
};

inline double effective_loss_cap(const InterpreterTrainConfig& cfg, int num_classes) {
    return cfg.loss_cap > 0.0 ? cfg.loss_cap
                              : std::log(static_cast<double>(num_classes)) + 2.0;
}

inline InterpreterModel make_interpreter_model(const ClassifierModel& classifier,
                                               const InterpreterTrainConfig& cfg,
                                               std::uint64_t seed) {
    InterpreterModel m;
    const int n = classifier.featurizer.n;
    std::vector<int> e_sizes = {n};
    for (int h : cfg.hidden) e_sizes.push_back(h);
    e_sizes.push_back(n);
    m.interpreter =
        make_dense_net(e_sizes, cfg.interpreter_head, derive_seed(seed, "interp-init"));
    // Fresh approximators with the classifier's architecture. Training them
    // from scratch alongside E keeps the alternating phases in pace with each
    // other; starting from the classifier's weights lands the whole system in
    // an immediate stalemate.
    m.approx_s = make_dense_net(classifier.net.sizes, OutputHead::Softmax,
                                derive_seed(seed, "approx-s-init"));
    m.approx_u = make_dense_net(classifier.net.sizes, OutputHead::Softmax,
                                derive_seed(seed, "approx-u-init"));
    m.k = cfg.k;
    m.num_classes = classifier.num_classes;
    return m;
}

// ---------------------------------------------------------------------------
// Step I tail: prediction-preserving filter
// ---------------------------------------------------------------------------

inline PerturbedSet filter_prediction_preserving(
    const ClassifierModel& m, const CodeExample& original,
    const std::vector<Candidate>& candidates) {
    PerturbedSet out;
    out.original_example = original;
    out.original = featurize(m.featurizer, original);
    out.candidates_generated = candidates.size();
    const int base_label = predict_label(m.net, out.original.values);
    for (const auto& cand : candidates) {
        FeatureVector fv = featurize(m.featurizer, cand.example);
        if (predict_label(m.net, fv.values) == base_label) {
            out.variant_examples.push_back(cand.example);
            out.variants.push_back(std::move(fv));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Soft Jaccard and the discrepancy loss
// ---------------------------------------------------------------------------

inline double soft_jaccard(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                           KinkTracker* kinks = nullptr) {
    if (p.size() != q.size())
        throw std::invalid_argument("soft_jaccard: size mismatch");
    double smin = 0.0, smax = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (kinks) kinks->record(p[i] - q[i]);
        smin += std::min(p[i], q[i]);
        smax += std::max(p[i], q[i]);
    }
    if (smax == 0.0) return 1.0;  // both all-zero
    return smin / smax;
}

// Subgradients of soft_jaccard with respect to both arguments. At ties the
// min branch takes p and the max branch takes q.
inline void soft_jaccard_grad(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                              Eigen::VectorXd& dp, Eigen::VectorXd& dq) {
    double smin = 0.0, smax = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        smin += std::min(p[i], q[i]);
        smax += std::max(p[i], q[i]);
    }
    dp = Eigen::VectorXd::Zero(p.size());
    dq = Eigen::VectorXd::Zero(q.size());
    if (smax == 0.0) return;
    const double inv = 1.0 / smax;
    const double ratio = smin / (smax * smax);
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const bool p_min = p[i] <= q[i];
        if (p_min) {
            dp[i] += inv;
            dq[i] -= ratio;
        } else {
            dq[i] += inv;
            dp[i] -= ratio;
        }
    }
}

// 1 - mean soft Jaccard over (original, perturbed) importance pairs.
inline double l_diff(const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>>& pairs,
                     KinkTracker* kinks = nullptr) {
    if (pairs.empty()) {
        std::cerr << "warning: l_diff over an empty pair set, defined as 0\n";
        return 0.0;
    }
    double total = 0.0;
    for (const auto& [p, q] : pairs) total += soft_jaccard(p, q, kinks);
    return 1.0 - total / static_cast<double>(pairs.size());
}

enum class MaskMode { Soft, HardK };

// Splits x into important/unimportant halves. Complementary by construction:
// the two halves always sum back to x.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> mask_split(
    const Eigen::VectorXd& x, const Eigen::VectorXd& p, MaskMode mode, int k = 0) {
    if (x.size() != p.size())
        throw std::invalid_argument("mask_split: size mismatch");
    if (mode == MaskMode::Soft) {
        Eigen::VectorXd xi = x.cwiseProduct(p);
        return {xi, x - xi};
    }
    Eigen::VectorXd mask = Eigen::VectorXd::Zero(x.size());
    for (int idx : top_k_indices(p, k)) mask[idx] = 1.0;
    Eigen::VectorXd xi = x.cwiseProduct(mask);
    return {xi, x - xi};
}

inline Eigen::VectorXd hard_mask_to(const Eigen::VectorXd& x, const TopKSet& keep) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
    for (int idx : keep) out[idx] = x[idx];
    return out;
}

// ---------------------------------------------------------------------------
// Training batches
// ---------------------------------------------------------------------------

// Originals and their surviving variants as columns; `pairs` holds
// (original column, variant column) indices for the discrepancy term.
struct PairBatch {
    Eigen::MatrixXd x;
    Eigen::MatrixXd y;
    std::vector<std::pair<int, int>> pairs;

    int cols() const { return static_cast<int>(x.cols()); }
};

inline PairBatch make_pair_batch(const std::vector<const PerturbedSet*>& groups,
                                 int num_classes) {
    int cols = 0;
    for (const auto* g : groups) cols += 1 + static_cast<int>(g->variants.size());
    const int n = groups.empty() ? 0 : static_cast<int>(groups[0]->original.values.size());
    PairBatch b;
    b.x.resize(n, cols);
    b.y = Eigen::MatrixXd::Zero(num_classes, cols);
    int c = 0;
    for (const auto* g : groups) {
        const int orig_col = c;
        b.x.col(c) = g->original.values;
        b.y(g->original_example.label, c) = 1.0;
        ++c;
        for (const auto& v : g->variants) {
            b.x.col(c) = v.values;
            b.y(g->original_example.label, c) = 1.0;
            b.pairs.emplace_back(orig_col, c);
            ++c;
        }
    }
    return b;
}

struct StepLosses {
    double l_s = 0.0;
    double l_u = 0.0;
    double l_diff = 0.0;
};

// Step II.1 objective: L_s + L_u through soft masks, with E frozen. Fills
// approximator gradients when requested.
inline StepLosses compute_approximator_step(const InterpreterModel& m,
                                            const PairBatch& batch, Gradients* g_s,
                                            Gradients* g_u,
                                            KinkTracker* kinks = nullptr) {
    Eigen::MatrixXd p = forward(m.interpreter, batch.x, nullptr, kinks);
    Eigen::MatrixXd xs = batch.x.cwiseProduct(p);
    Eigen::MatrixXd xu = batch.x - xs;

    ForwardTrace ts, tu;
    Eigen::MatrixXd ps = forward(m.approx_s, xs, &ts, kinks);
    Eigen::MatrixXd pu = forward(m.approx_u, xu, &tu, kinks);

    StepLosses losses;
    losses.l_s = cross_entropy_mean(ps, batch.y);
    losses.l_u = cross_entropy_mean(pu, batch.y);
    std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> pairs;
    for (const auto& [i, j] : batch.pairs) pairs.emplace_back(p.col(i), p.col(j));
    if (!pairs.empty()) {
        double total = 0.0;
        for (const auto& [a, b] : pairs) total += soft_jaccard(a, b, kinks);
        losses.l_diff = 1.0 - total / static_cast<double>(pairs.size());
    }

    if (g_s) *g_s = backward(m.approx_s, ts, cross_entropy_mean_grad(ps, batch.y));
    if (g_u) *g_u = backward(m.approx_u, tu, cross_entropy_mean_grad(pu, batch.y));
    return losses;
}

// Step II.2 objective: L_s - min(L_u, cap) + w * L_diff with the
// approximators frozen. Gradients flow into E through both mask products and
// the Jaccard pairs; both Siamese towers are the same parameter set.
inline StepLosses compute_interpreter_step(const InterpreterModel& m,
                                           const PairBatch& batch, double l_diff_weight,
                                           double cap, Gradients* g_e,
                                           KinkTracker* kinks = nullptr) {
    ForwardTrace te;
    Eigen::MatrixXd p = forward(m.interpreter, batch.x, &te, kinks);
    Eigen::MatrixXd xs = batch.x.cwiseProduct(p);
    Eigen::MatrixXd xu = batch.x - xs;

    ForwardTrace ts, tu;
    Eigen::MatrixXd ps = forward(m.approx_s, xs, &ts, kinks);
    Eigen::MatrixXd pu = forward(m.approx_u, xu, &tu, kinks);

    StepLosses losses;
    losses.l_s = cross_entropy_mean(ps, batch.y);
    losses.l_u = cross_entropy_mean(pu, batch.y);

    double jac_total = 0.0;
    for (const auto& [i, j] : batch.pairs)
        jac_total += soft_jaccard(p.col(i), p.col(j), kinks);
    if (!batch.pairs.empty())
        losses.l_diff = 1.0 - jac_total / static_cast<double>(batch.pairs.size());

    if (kinks) kinks->record(losses.l_u - cap);

    if (g_e) {
        // d(objective)/dP accumulated across the three paths.
        Eigen::MatrixXd dp = Eigen::MatrixXd::Zero(p.rows(), p.cols());

        Gradients gs = backward(m.approx_s, ts, cross_entropy_mean_grad(ps, batch.y));
        dp += gs.d_input.cwiseProduct(batch.x);

        if (losses.l_u < cap) {
            Gradients gu = backward(m.approx_u, tu, cross_entropy_mean_grad(pu, batch.y));
            // xu = x (1 - p): the chain rule flips the sign, and the
            // objective negates it again.
            dp += gu.d_input.cwiseProduct(batch.x);
        }

        if (l_diff_weight != 0.0 && !batch.pairs.empty()) {
            const double scale = l_diff_weight / static_cast<double>(batch.pairs.size());
            for (const auto& [i, j] : batch.pairs) {
                Eigen::VectorXd da, db;
                soft_jaccard_grad(p.col(i), p.col(j), da, db);
                dp.col(i) -= scale * da;
                dp.col(j) -= scale * db;
            }
        }

        *g_e = backward(m.interpreter, te, dp);
    }
    return losses;
}

// Mixup-phase loss: cross-entropy of A_s on the soft-masked virtual example
// against the interpolated label. Only E sees gradient.
inline double compute_mixup_loss(const InterpreterModel& m, const Eigen::MatrixXd& x_mix,
                                 const Eigen::MatrixXd& y_mix, Gradients* g_e,
                                 KinkTracker* kinks = nullptr) {
    ForwardTrace te;
    Eigen::MatrixXd p = forward(m.interpreter, x_mix, &te, kinks);
    Eigen::MatrixXd xs = x_mix.cwiseProduct(p);
    ForwardTrace ts;
    Eigen::MatrixXd ps = forward(m.approx_s, xs, &ts, kinks);
    const double loss = cross_entropy_mean(ps, y_mix);
    if (g_e) {
        Gradients gs = backward(m.approx_s, ts, cross_entropy_mean_grad(ps, y_mix));
        *g_e = backward(m.interpreter, te, gs.d_input.cwiseProduct(x_mix));
    }
    return loss;
}

// ---------------------------------------------------------------------------
// Training loops
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<PairBatch> build_batches(const std::vector<PerturbedSet>& sets,
                                            int num_classes, int batch_size, Rng& rng) {
    std::vector<std::size_t> order(sets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<PairBatch> batches;
    std::vector<const PerturbedSet*> group;
    int cols = 0;
    for (std::size_t idx : order) {
        group.push_back(&sets[idx]);
        cols += 1 + static_cast<int>(sets[idx].variants.size());
        if (cols >= batch_size) {
            batches.push_back(make_pair_batch(group, num_classes));
            group.clear();
            cols = 0;
        }
    }
    if (!group.empty()) batches.push_back(make_pair_batch(group, num_classes));
    return batches;
}

inline double composite_validation_loss(const InterpreterModel& m,
                                        const std::vector<PerturbedSet>& val_sets,
                                        double l_diff_weight) {
    if (val_sets.empty()) return 0.0;
    std::vector<const PerturbedSet*> all;
    for (const auto& s : val_sets) all.push_back(&s);
    PairBatch batch = make_pair_batch(all, m.num_classes);
    StepLosses losses = compute_approximator_step(m, batch, nullptr, nullptr);
    return losses.l_s - losses.l_u + l_diff_weight * losses.l_diff;
}

}  // namespace detail

struct TrainStepStats {
    StepLosses mean;
    int batches = 0;
};

// One optimizer pass of Step II.1 over the given batches. E's parameters are
// untouched by construction (no gradient path is even computed).
inline TrainStepStats train_step_approximators(InterpreterModel& m,
                                               const std::vector<PairBatch>& batches,
                                               Optimizer& opt_s, Optimizer& opt_u) {
    TrainStepStats stats;
    for (const auto& batch : batches) {
        Gradients gs, gu;
        StepLosses losses = compute_approximator_step(m, batch, &gs, &gu);
        if (!std::isfinite(losses.l_s) || !std::isfinite(losses.l_u))
            throw TrainError("approximator training diverged");
        opt_s.step(m.approx_s, gs);
        opt_u.step(m.approx_u, gu);
        stats.mean.l_s += losses.l_s;
        stats.mean.l_u += losses.l_u;
        stats.mean.l_diff += losses.l_diff;
        ++stats.batches;
    }
    if (stats.batches) {
        stats.mean.l_s /= stats.batches;
        stats.mean.l_u /= stats.batches;
        stats.mean.l_diff /= stats.batches;
    }
    return stats;
}

// One optimizer pass of Step II.2, updating only E.
inline TrainStepStats train_step_interpreter(InterpreterModel& m,
                                             const std::vector<PairBatch>& batches,
                                             double l_diff_weight, double cap,
                                             Optimizer& opt_e) {
    TrainStepStats stats;
    for (const auto& batch : batches) {
        Gradients ge;
        StepLosses losses =
            compute_interpreter_step(m, batch, l_diff_weight, cap, &ge);
        if (!std::isfinite(losses.l_s) || !std::isfinite(losses.l_u) ||
            !std::isfinite(losses.l_diff))
            throw TrainError("interpreter training diverged");
        opt_e.step(m.interpreter, ge);
        stats.mean.l_s += losses.l_s;
        stats.mean.l_u += losses.l_u;
        stats.mean.l_diff += losses.l_diff;
        ++stats.batches;
    }
    if (stats.batches) {
        stats.mean.l_s /= stats.batches;
        stats.mean.l_u /= stats.batches;
        stats.mean.l_diff /= stats.batches;
    }
    return stats;
}

// Step II: alternate one approximator epoch with one interpreter epoch until
// the composite validation loss stops improving.
inline InterpreterModel train_preliminary(const ClassifierModel& classifier,
                                          const std::vector<PerturbedSet>& train_sets,
                                          const std::vector<PerturbedSet>& val_sets,
                                          const InterpreterTrainConfig& cfg,
                                          std::uint64_t seed) {
    if (train_sets.empty()) throw TrainError("no perturbed sets to train on");
    InterpreterModel m = make_interpreter_model(classifier, cfg, seed);
    const double cap = effective_loss_cap(cfg, m.num_classes);
    const double w = cfg.factor1 ? cfg.l_diff_weight : 0.0;

    Optimizer opt_s, opt_u, opt_e;
    for (Optimizer* o : {&opt_s, &opt_u, &opt_e}) o->kind = cfg.optimizer;
    opt_s.learning_rate = cfg.approx_learning_rate;
    opt_u.learning_rate = cfg.approx_learning_rate;
    opt_e.learning_rate = cfg.interpreter_learning_rate;

    Rng rng(derive_seed(seed, "preliminary"));
    double best = std::numeric_limits<double>::infinity();
    int stall = 0;

    for (int round = 1; round <= cfg.max_rounds; ++round) {
        auto batches =
            detail::build_batches(train_sets, m.num_classes, cfg.batch_size, rng);

        TrainStepStats a = train_step_approximators(m, batches, opt_s, opt_u);
        m.history.push_back(
            {round, TrainPhase::Approximators, a.mean.l_s, a.mean.l_u, a.mean.l_diff});

        TrainStepStats e = train_step_interpreter(m, batches, w, cap, opt_e);
        m.history.push_back(
            {round, TrainPhase::Interpreter, e.mean.l_s, e.mean.l_u, e.mean.l_diff});

        const double composite =
            val_sets.empty()
                ? e.mean.l_s - e.mean.l_u + w * e.mean.l_diff
                : detail::composite_validation_loss(m, val_sets, w);
        if (best - composite >= cfg.convergence_tol) {
            best = composite;
            stall = 0;
        } else if (++stall >= cfg.convergence_patience) {
            break;
        }
    }
    return m;
}

inline MixedExample mixup_pair(const Eigen::VectorXd& x_i, const Eigen::VectorXd& y_i,
                               const Eigen::VectorXd& x_p, const Eigen::VectorXd& y_p,
                               double lambda) {
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("mixup lambda must be in [0, 1]");
    MixedExample out;
    out.lambda = lambda;
    out.x_mix = lambda * x_i + (1.0 - lambda) * x_p;
    out.y_mix = lambda * y_i + (1.0 - lambda) * y_p;
    return out;
}

// Step III: joint optimization on virtual examples. For every original, a
// partner is drawn uniformly from the pooled perturbed examples and mixed
// with a Beta(alpha, alpha) coefficient; only E is updated.
inline void optimize_with_mixup(InterpreterModel& m,
                                const std::vector<PerturbedSet>& train_sets,
                                const InterpreterTrainConfig& cfg, std::uint64_t seed) {
    struct PoolEntry {
        const Eigen::VectorXd* x;
        int label;
    };
    std::vector<PoolEntry> pool;
    std::vector<const PerturbedSet*> originals;
    for (const auto& s : train_sets) {
        originals.push_back(&s);
        for (const auto& v : s.variants)
            pool.push_back({&v.values, s.original_example.label});
    }
    if (pool.empty()) {
        std::cerr << "warning: no perturbed examples survive; skipping mixup phase\n";
        return;
    }

    Optimizer opt_e;
    opt_e.kind = cfg.mixup_optimizer;
    opt_e.learning_rate = cfg.mixup_learning_rate;

    Rng rng(derive_seed(seed, "mixup"));
    const int n = static_cast<int>(originals[0]->original.values.size());

    for (int epoch = 1; epoch <= cfg.mixup_epochs; ++epoch) {
        std::vector<std::size_t> order(originals.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);

        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t count =
                std::min<std::size_t>(cfg.batch_size, order.size() - start);
            Eigen::MatrixXd x_mix(n, count);
            Eigen::MatrixXd y_mix = Eigen::MatrixXd::Zero(m.num_classes, count);
            for (std::size_t i = 0; i < count; ++i) {
                const PerturbedSet& g = *originals[order[start + i]];
                const PoolEntry& partner = pool[rng.next_index(pool.size())];
                const double lambda = rng.next_beta(cfg.mixup_alpha, cfg.mixup_alpha);
                MixedExample mix = mixup_pair(
                    g.original.values, one_hot(g.original_example.label, m.num_classes),
                    *partner.x, one_hot(partner.label, m.num_classes), lambda);
                x_mix.col(i) = mix.x_mix;
                y_mix.col(i) = mix.y_mix;
            }
            Gradients ge;
            const double loss = compute_mixup_loss(m, x_mix, y_mix, &ge);
            if (!std::isfinite(loss)) throw TrainError("mixup phase diverged");
            opt_e.step(m.interpreter, ge);
            epoch_loss += loss;
            ++batches;
        }
        m.history.push_back(
            {epoch, TrainPhase::Mixup, batches ? epoch_loss / batches : 0.0, 0.0, 0.0});
    }
}

// ---------------------------------------------------------------------------
// Inference
// ---------------------------------------------------------------------------

inline std::pair<ImportanceVector, TopKSet> explain(const InterpreterModel& m,
                                                    const FeatureVector& x, int k) {
    ImportanceVector iv;
    iv.scores = forward(m.interpreter, x.values);
    iv.example_id = x.example_id;
    TopKSet top = top_k_indices(iv.scores, k);
    return {std::move(iv), std::move(top)};
}

}  // namespace robin
