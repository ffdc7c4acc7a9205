#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robin/classifier.hpp"
#include "robin/config.hpp"
#include "robin/errors.hpp"
#include "robin/interpreter.hpp"
#include "robin/version.hpp"

namespace robin {

namespace detail {

inline nlohmann::json net_to_json(const DenseNet& net) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        const auto& w = net.weights[l];
        std::vector<double> flat;  // row-major
        flat.reserve(static_cast<std::size_t>(w.size()));
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
        std::vector<double> bias(net.biases[l].data(),
                                 net.biases[l].data() + net.biases[l].size());
        layers.push_back({{"shape", {w.rows(), w.cols()}},
                          {"weights", flat},
                          {"bias", bias}});
    }
    const char* head = net.head == OutputHead::Softmax
                           ? "softmax"
                           : (net.head == OutputHead::Sigmoid ? "sigmoid" : "linear");
    return {{"sizes", net.sizes}, {"head", head}, {"layers", layers}};
}

inline DenseNet net_from_json(const nlohmann::json& j) {
    DenseNet net;
    net.sizes = j.at("sizes").get<std::vector<int>>();
    const std::string head = j.at("head").get<std::string>();
    net.head = head == "softmax" ? OutputHead::Softmax
                                 : (head == "sigmoid" ? OutputHead::Sigmoid
                                                      : OutputHead::Linear);
    for (const auto& layer : j.at("layers")) {
        const auto shape = layer.at("shape").get<std::vector<Eigen::Index>>();
        const auto flat = layer.at("weights").get<std::vector<double>>();
        const auto bias = layer.at("bias").get<std::vector<double>>();
        if (shape.size() != 2 ||
            static_cast<Eigen::Index>(flat.size()) != shape[0] * shape[1] ||
            static_cast<Eigen::Index>(bias.size()) != shape[0])
            throw CheckpointError("net layer shape mismatch");
        Eigen::MatrixXd w(shape[0], shape[1]);
        std::size_t k = 0;
        for (Eigen::Index r = 0; r < shape[0]; ++r)
            for (Eigen::Index c = 0; c < shape[1]; ++c) w(r, c) = flat[k++];
        net.weights.push_back(std::move(w));
        net.biases.push_back(
            Eigen::Map<const Eigen::VectorXd>(bias.data(), shape[0]));
    }
    return net;
}

inline nlohmann::json config_to_json(const PipelineConfig& c) {
    return {{"num_classes", c.num_classes},
            {"examples_per_class", c.examples_per_class},
            {"manifest", c.manifest},
            {"split_train", c.split_train},
            {"split_val", c.split_val},
            {"split_test", c.split_test},
            {"allow_empty_splits", c.allow_empty_splits},
            {"feature_count", c.feature_count},
            {"classifier_hidden", c.classifier_hidden},
            {"classifier_epochs", c.classifier_epochs},
            {"classifier_patience", c.classifier_patience},
            {"batch_size", c.batch_size},
            {"learning_rate", c.learning_rate},
            {"optimizer", c.optimizer},
            {"theta", c.theta},
            {"num_candidates", c.num_candidates},
            {"top_k", c.top_k},
            {"interpreter_hidden", c.interpreter_hidden},
            {"rounds", c.rounds},
            {"interpreter_learning_rate", c.interpreter_learning_rate},
            {"convergence_tol", c.convergence_tol},
            {"convergence_patience", c.convergence_patience},
            {"mixup_epochs", c.mixup_epochs},
            {"mixup_alpha", c.mixup_alpha},
            {"mixup_optimizer", c.mixup_optimizer},
            {"mixup_learning_rate", c.mixup_learning_rate},
            {"factor1", c.factor1},
            {"factor2", c.factor2},
            {"loss_cap", c.loss_cap},
            {"interpreter_head", c.interpreter_head},
            {"seed", c.seed}};
}

inline PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig c;
    c.num_classes = j.at("num_classes").get<int>();
    c.examples_per_class = j.at("examples_per_class").get<int>();
    c.manifest = j.at("manifest").get<std::string>();
    c.split_train = j.at("split_train").get<int>();
    c.split_val = j.at("split_val").get<int>();
    c.split_test = j.at("split_test").get<int>();
    c.allow_empty_splits = j.at("allow_empty_splits").get<bool>();
    c.feature_count = j.at("feature_count").get<int>();
    c.classifier_hidden = j.at("classifier_hidden").get<std::vector<int>>();
    c.classifier_epochs = j.at("classifier_epochs").get<int>();
    c.classifier_patience = j.at("classifier_patience").get<int>();
    c.batch_size = j.at("batch_size").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.optimizer = j.at("optimizer").get<std::string>();
    c.theta = j.at("theta").get<int>();
    c.num_candidates = j.at("num_candidates").get<int>();
    c.top_k = j.at("top_k").get<int>();
    c.interpreter_hidden = j.at("interpreter_hidden").get<std::vector<int>>();
    c.rounds = j.at("rounds").get<int>();
    c.interpreter_learning_rate = j.at("interpreter_learning_rate").get<double>();
    c.convergence_tol = j.at("convergence_tol").get<double>();
    c.convergence_patience = j.at("convergence_patience").get<int>();
    c.mixup_epochs = j.at("mixup_epochs").get<int>();
    c.mixup_alpha = j.at("mixup_alpha").get<double>();
    c.mixup_optimizer = j.at("mixup_optimizer").get<std::string>();
    c.mixup_learning_rate = j.at("mixup_learning_rate").get<double>();
    c.factor1 = j.at("factor1").get<bool>();
    c.factor2 = j.at("factor2").get<bool>();
    c.loss_cap = j.at("loss_cap").get<double>();
    c.interpreter_head = j.at("interpreter_head").get<std::string>();
    c.seed = j.at("seed").get<std::uint64_t>();
    return c;
}

}  // namespace detail

// Everything a pipeline stage needs from its predecessors, in one portable
// JSON document. Tensors are flat row-major arrays with explicit shapes.
struct Checkpoint {
    std::uint64_t seed = 0;
    PipelineConfig config;
    std::string corpus_manifest;
    std::vector<std::string> label_names;
    std::vector<std::string> train_ids, val_ids, test_ids;

    bool has_classifier = false;
    ClassifierModel classifier;
    double test_accuracy = 0.0;

    std::map<std::string, InterpreterModel> interpreters;  // variant name -> model
};

inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
    nlohmann::json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["artifact_version"] = kArtifactVersion;
    j["seed"] = ck.seed;
    j["config"] = detail::config_to_json(ck.config);
    j["corpus_manifest"] = ck.corpus_manifest;
    j["label_names"] = ck.label_names;
    j["split"] = {{"train", ck.train_ids}, {"val", ck.val_ids}, {"test", ck.test_ids}};
    if (ck.has_classifier) {
        j["featurizer"] = {{"n", ck.classifier.featurizer.n},
                           {"vocabulary", ck.classifier.featurizer.vocabulary},
                           {"idf", std::vector<double>(
                                       ck.classifier.featurizer.idf.data(),
                                       ck.classifier.featurizer.idf.data() +
                                           ck.classifier.featurizer.idf.size())}};
        j["classifier"] = {{"net", detail::net_to_json(ck.classifier.net)},
                           {"num_classes", ck.classifier.num_classes},
                           {"train_accuracy", ck.classifier.train_accuracy},
                           {"val_accuracy", ck.classifier.val_accuracy},
                           {"test_accuracy", ck.test_accuracy}};
    }
    if (!ck.interpreters.empty()) {
        nlohmann::json robins;
        for (const auto& [name, m] : ck.interpreters) {
            robins[name] = {{"interpreter", detail::net_to_json(m.interpreter)},
                            {"approx_s", detail::net_to_json(m.approx_s)},
                            {"approx_u", detail::net_to_json(m.approx_u)},
                            {"k", m.k},
                            {"num_classes", m.num_classes}};
        }
        j["robin"] = robins;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CheckpointError("cannot write checkpoint: " + path.string());
    out << j.dump(1) << "\n";
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("checkpoint not found: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    const int version = j.value("schema_version", -1);
    if (version != kCheckpointSchemaVersion)
        throw CheckpointError("checkpoint schema version " + std::to_string(version) +
                              " does not match supported version " +
                              std::to_string(kCheckpointSchemaVersion));
    Checkpoint ck;
    try {
        ck.seed = j.at("seed").get<std::uint64_t>();
        ck.config = detail::config_from_json(j.at("config"));
        ck.corpus_manifest = j.at("corpus_manifest").get<std::string>();
        ck.label_names = j.at("label_names").get<std::vector<std::string>>();
        ck.train_ids = j.at("split").at("train").get<std::vector<std::string>>();
        ck.val_ids = j.at("split").at("val").get<std::vector<std::string>>();
        ck.test_ids = j.at("split").at("test").get<std::vector<std::string>>();
        if (j.contains("classifier")) {
            ck.has_classifier = true;
            const auto& f = j.at("featurizer");
            ck.classifier.featurizer.n = f.at("n").get<int>();
            ck.classifier.featurizer.vocabulary =
                f.at("vocabulary").get<std::vector<std::string>>();
            auto idf = f.at("idf").get<std::vector<double>>();
            ck.classifier.featurizer.idf =
                Eigen::Map<const Eigen::VectorXd>(idf.data(), idf.size());
            ck.classifier.featurizer.rebuild_index();
            ck.classifier.net = detail::net_from_json(j.at("classifier").at("net"));
            ck.classifier.num_classes = j.at("classifier").at("num_classes").get<int>();
            ck.classifier.train_accuracy =
                j.at("classifier").at("train_accuracy").get<double>();
            ck.classifier.val_accuracy =
                j.at("classifier").at("val_accuracy").get<double>();
            ck.test_accuracy = j.at("classifier").at("test_accuracy").get<double>();
            ck.classifier.config = to_classifier_config(ck.config);
        }
        if (j.contains("robin")) {
            for (const auto& [name, rj] : j.at("robin").items()) {
                InterpreterModel m;
                m.interpreter = detail::net_from_json(rj.at("interpreter"));
                m.approx_s = detail::net_from_json(rj.at("approx_s"));
                m.approx_u = detail::net_from_json(rj.at("approx_u"));
                m.k = rj.at("k").get<int>();
                m.num_classes = rj.at("num_classes").get<int>();
                ck.interpreters[name] = std::move(m);
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("malformed checkpoint " + path.string() + ": " + e.what());
    }
    return ck;
}

}  // namespace robin
