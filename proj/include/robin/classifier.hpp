#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robin/errors.hpp"
#include "robin/example.hpp"
#include "robin/features.hpp"
#include "robin/nn.hpp"
#include "robin/rng.hpp"

namespace robin {

struct ClassifierConfig {
    std::vector<int> hidden = {128, 64};
    int max_epochs = 200;
    int patience = 10;
    int batch_size = 32;
    double learning_rate = 1e-3;
    OptimizerKind optimizer = OptimizerKind::Adam;
};

// The classifier under interpretation: TF-IDF features into a dense softmax
// net. Approximators clone this architecture.
struct ClassifierModel {
    Featurizer featurizer;
    DenseNet net;
    ClassifierConfig config;
    int num_classes = 0;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
};

inline std::pair<int, Eigen::VectorXd> predict(const DenseNet& net,
                                               const Eigen::VectorXd& x) {
    Eigen::VectorXd probs = forward(net, x);
    return {argmax_lowest(probs), probs};
}

inline std::pair<int, Eigen::VectorXd> predict(const ClassifierModel& m,
                                               const Eigen::VectorXd& x) {
    return predict(m.net, x);
}

inline int predict_label(const DenseNet& net, const Eigen::VectorXd& x) {
    return argmax_lowest(forward(net, x));
}

inline double accuracy(const DenseNet& net, const Eigen::MatrixXd& x,
                       const std::vector<int>& labels) {
    if (labels.empty()) return 0.0;
    Eigen::MatrixXd probs = forward(net, x);
    std::size_t hits = 0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c)
        if (argmax_lowest(probs.col(c)) == labels[c]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

namespace detail {

struct TrainedNet {
    DenseNet net;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
    int epochs_run = 0;
};

// Mini-batch training with early stopping on validation accuracy. The best
// validation snapshot is restored at the end.
inline TrainedNet train_softmax_net(const Eigen::MatrixXd& x_train,
                                    const std::vector<int>& y_train,
                                    const Eigen::MatrixXd& x_val,
                                    const std::vector<int>& y_val, int num_classes,
                                    const ClassifierConfig& cfg, std::uint64_t seed) {
    const int n = static_cast<int>(x_train.rows());
    std::vector<int> sizes = {n};
    for (int h : cfg.hidden) sizes.push_back(h);
    sizes.push_back(num_classes);

    TrainedNet out;
    out.net = make_dense_net(sizes, OutputHead::Softmax, derive_seed(seed, "init"));

    Eigen::MatrixXd targets = Eigen::MatrixXd::Zero(num_classes, x_train.cols());
    for (Eigen::Index i = 0; i < x_train.cols(); ++i) targets(y_train[i], i) = 1.0;

    Optimizer opt;
    opt.kind = cfg.optimizer;
    opt.learning_rate = cfg.learning_rate;

    Rng rng(derive_seed(seed, "batch-order"));
    std::vector<std::size_t> order(x_train.cols());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Eigen::VectorXd best_params = net_params(out.net);
    double best_val = -1.0;
    int stall = 0;

    const bool has_val = x_val.cols() > 0;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t count =
                std::min<std::size_t>(cfg.batch_size, order.size() - start);
            Eigen::MatrixXd xb(n, count), tb(num_classes, count);
            for (std::size_t i = 0; i < count; ++i) {
                xb.col(i) = x_train.col(order[start + i]);
                tb.col(i) = targets.col(order[start + i]);
            }
            ForwardTrace trace;
            Eigen::MatrixXd probs = forward(out.net, xb, &trace);
            const double loss = cross_entropy_mean(probs, tb);
            if (!std::isfinite(loss))
                throw TrainError("classifier diverged at epoch " + std::to_string(epoch));
            Gradients g = backward(out.net, trace, cross_entropy_mean_grad(probs, tb));
            opt.step(out.net, g);
        }
        out.epochs_run = epoch;
        const double val_acc =
            has_val ? accuracy(out.net, x_val, y_val) : accuracy(out.net, x_train, y_train);
        if (val_acc > best_val) {
            best_val = val_acc;
            best_params = net_params(out.net);
            stall = 0;
        } else if (++stall >= cfg.patience) {
            break;
        }
    }
    set_net_params(out.net, best_params);
    out.train_accuracy = accuracy(out.net, x_train, y_train);
    out.val_accuracy = has_val ? best_val : out.train_accuracy;
    return out;
}

inline Eigen::MatrixXd stack_features(const std::vector<FeatureVector>& vecs) {
    if (vecs.empty()) return Eigen::MatrixXd(0, 0);
    Eigen::MatrixXd x(vecs[0].values.size(), vecs.size());
    for (std::size_t i = 0; i < vecs.size(); ++i) x.col(i) = vecs[i].values;
    return x;
}

}  // namespace detail

inline ClassifierModel train_classifier(const Corpus& train, const Corpus& val,
                                        const Featurizer& featurizer,
                                        const ClassifierConfig& cfg, std::uint64_t seed) {
    if (train.examples.empty()) throw TrainError("training split is empty");
    std::vector<FeatureVector> ftr = featurize_all(featurizer, train);
    std::vector<FeatureVector> fval = featurize_all(featurizer, val);
    std::vector<int> ytr, yval;
    for (const auto& e : train.examples) ytr.push_back(e.label);
    for (const auto& e : val.examples) yval.push_back(e.label);

    ClassifierModel model;
    model.featurizer = featurizer;
    model.config = cfg;
    model.num_classes = train.num_classes;
    auto trained = detail::train_softmax_net(
        detail::stack_features(ftr), ytr,
        val.examples.empty() ? Eigen::MatrixXd(featurizer.n, 0)
                             : detail::stack_features(fval),
        yval, train.num_classes, cfg, seed);
    model.net = std::move(trained.net);
    model.train_accuracy = trained.train_accuracy;
    model.val_accuracy = trained.val_accuracy;
    return model;
}

// Retrains an architecture-identical classifier with each training example's
// q least-important coordinates zeroed. `masks` maps example id to the
// indices to remove and must cover the whole split.
inline ClassifierModel retrain_ablated(
    const ClassifierModel& base, const Corpus& train,
    const std::map<std::string, std::vector<int>>& masks, int q, std::uint64_t seed) {
    const int n = base.featurizer.n;
    const int step = n / 8;
    const bool on_grid = q >= step && q <= 7 * step && q % step == 0;
    if (!on_grid && q != 0 && q != n)
        throw ConfigError("ablation q=" + std::to_string(q) +
                          " outside the n/8 grid for n=" + std::to_string(n));

    std::vector<FeatureVector> ftr = featurize_all(base.featurizer, train);
    std::vector<int> ytr;
    for (const auto& e : train.examples) ytr.push_back(e.label);

    Eigen::MatrixXd x = detail::stack_features(ftr);
    for (std::size_t i = 0; i < ftr.size(); ++i) {
        auto it = masks.find(ftr[i].example_id);
        if (it == masks.end())
            throw ConfigError("ablation mask missing for example '" +
                              ftr[i].example_id + "'");
        if (static_cast<int>(it->second.size()) != q)
            throw ConfigError("ablation mask for '" + ftr[i].example_id + "' has " +
                              std::to_string(it->second.size()) + " indices, expected " +
                              std::to_string(q));
        for (int idx : it->second) x(idx, i) = 0.0;
    }

    ClassifierModel model;
    model.featurizer = base.featurizer;
    model.config = base.config;
    model.num_classes = base.num_classes;
    auto trained = detail::train_softmax_net(x, ytr, Eigen::MatrixXd(n, 0), {},
                                             base.num_classes, base.config, seed);
    model.net = std::move(trained.net);
    model.train_accuracy = trained.train_accuracy;
    model.val_accuracy = trained.val_accuracy;
    return model;
}

}  // namespace robin
