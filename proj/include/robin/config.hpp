#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "robin/classifier.hpp"
#include "robin/corpus.hpp"
#include "robin/errors.hpp"
#include "robin/interpreter.hpp"

namespace robin {

// Flat key/value pipeline configuration. Every field has a default; unknown
// keys are rejected at parse time.
struct PipelineConfig {
    // corpus
    int num_classes = 10;
    int examples_per_class = 50;
    std::string manifest;  // when set, ingest this corpus instead of generating
    int split_train = 3;
    int split_val = 1;
    int split_test = 1;
    bool allow_empty_splits = false;

    // features
    int feature_count = 256;

    // classifier
    std::vector<int> classifier_hidden = {128, 64};
    int classifier_epochs = 200;
    int classifier_patience = 10;
    int batch_size = 32;
    double learning_rate = 1e-3;
    std::string optimizer = "adam";

    // perturbation
    int theta = 4;
    int num_candidates = 4;  // m

    // interpreter
    int top_k = 10;
    std::vector<int> interpreter_hidden = {128, 64};
    int rounds = 300;
    double interpreter_learning_rate = 1e-2;
    double convergence_tol = 1e-4;
    int convergence_patience = 10;
    int mixup_epochs = 30;
    double mixup_alpha = 1.0;
    std::string mixup_optimizer = "sgd";
    double mixup_learning_rate = 1e-3;
    bool factor1 = true;
    bool factor2 = true;
    double loss_cap = 0.0;  // 0 = ln(C) + 2
    std::string interpreter_head = "sigmoid";

    std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<int> parse_int_list(const std::string& s, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (...) {
            throw ConfigError(key + ": expected comma-separated integers, got '" + s +
                              "'");
        }
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

inline bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError(key + ": expected true/false, got '" + s + "'");
}

template <typename T>
T parse_number(const std::string& s, const std::string& key) {
    std::stringstream ss(s);
    T v;
    ss >> v;
    if (ss.fail() || !ss.eof())
        throw ConfigError(key + ": expected a number, got '" + s + "'");
    return v;
}

}  // namespace detail

// Assigns one key. Shared by the file parser and CLI overrides so both paths
// reject unknown keys identically.
inline void set_config_field(PipelineConfig& cfg, const std::string& key,
                             const std::string& value) {
    using detail::parse_bool;
    using detail::parse_int_list;
    using detail::parse_number;
    static const std::map<std::string,
                          std::function<void(PipelineConfig&, const std::string&)>>
        setters = {
            {"num_classes",
             [](PipelineConfig& c, const std::string& v) {
                 c.num_classes = parse_number<int>(v, "num_classes");
             }},
            {"examples_per_class",
             [](PipelineConfig& c, const std::string& v) {
                 c.examples_per_class = parse_number<int>(v, "examples_per_class");
             }},
            {"manifest",
             [](PipelineConfig& c, const std::string& v) { c.manifest = v; }},
            {"split_train",
             [](PipelineConfig& c, const std::string& v) {
                 c.split_train = parse_number<int>(v, "split_train");
             }},
            {"split_val",
             [](PipelineConfig& c, const std::string& v) {
                 c.split_val = parse_number<int>(v, "split_val");
             }},
            {"split_test",
             [](PipelineConfig& c, const std::string& v) {
                 c.split_test = parse_number<int>(v, "split_test");
             }},
            {"allow_empty_splits",
             [](PipelineConfig& c, const std::string& v) {
                 c.allow_empty_splits = parse_bool(v, "allow_empty_splits");
             }},
            {"feature_count",
             [](PipelineConfig& c, const std::string& v) {
                 c.feature_count = parse_number<int>(v, "feature_count");
             }},
            {"classifier_hidden",
             [](PipelineConfig& c, const std::string& v) {
                 c.classifier_hidden = parse_int_list(v, "classifier_hidden");
             }},
            {"classifier_epochs",
             [](PipelineConfig& c, const std::string& v) {
                 c.classifier_epochs = parse_number<int>(v, "classifier_epochs");
             }},
            {"classifier_patience",
             [](PipelineConfig& c, const std::string& v) {
                 c.classifier_patience = parse_number<int>(v, "classifier_patience");
             }},
            {"batch_size",
             [](PipelineConfig& c, const std::string& v) {
                 c.batch_size = parse_number<int>(v, "batch_size");
             }},
            {"learning_rate",
             [](PipelineConfig& c, const std::string& v) {
                 c.learning_rate = parse_number<double>(v, "learning_rate");
             }},
            {"optimizer",
             [](PipelineConfig& c, const std::string& v) { c.optimizer = v; }},
            {"theta",
             [](PipelineConfig& c, const std::string& v) {
                 c.theta = parse_number<int>(v, "theta");
             }},
            {"num_candidates",
             [](PipelineConfig& c, const std::string& v) {
                 c.num_candidates = parse_number<int>(v, "num_candidates");
             }},
            {"top_k",
             [](PipelineConfig& c, const std::string& v) {
                 c.top_k = parse_number<int>(v, "top_k");
             }},
            {"interpreter_hidden",
             [](PipelineConfig& c, const std::string& v) {
                 c.interpreter_hidden = parse_int_list(v, "interpreter_hidden");
             }},
            {"rounds",
             [](PipelineConfig& c, const std::string& v) {
                 c.rounds = parse_number<int>(v, "rounds");
             }},
            {"interpreter_learning_rate",
             [](PipelineConfig& c, const std::string& v) {
                 c.interpreter_learning_rate =
                     parse_number<double>(v, "interpreter_learning_rate");
             }},
            {"convergence_tol",
             [](PipelineConfig& c, const std::string& v) {
                 c.convergence_tol = parse_number<double>(v, "convergence_tol");
             }},
            {"convergence_patience",
             [](PipelineConfig& c, const std::string& v) {
                 c.convergence_patience = parse_number<int>(v, "convergence_patience");
             }},
            {"mixup_epochs",
             [](PipelineConfig& c, const std::string& v) {
                 c.mixup_epochs = parse_number<int>(v, "mixup_epochs");
             }},
            {"mixup_alpha",
             [](PipelineConfig& c, const std::string& v) {
                 c.mixup_alpha = parse_number<double>(v, "mixup_alpha");
             }},
            {"mixup_optimizer",
             [](PipelineConfig& c, const std::string& v) { c.mixup_optimizer = v; }},
            {"mixup_learning_rate",
             [](PipelineConfig& c, const std::string& v) {
                 c.mixup_learning_rate = parse_number<double>(v, "mixup_learning_rate");
             }},
            {"factor1",
             [](PipelineConfig& c, const std::string& v) {
                 c.factor1 = parse_bool(v, "factor1");
             }},
            {"factor2",
             [](PipelineConfig& c, const std::string& v) {
                 c.factor2 = parse_bool(v, "factor2");
             }},
            {"loss_cap",
             [](PipelineConfig& c, const std::string& v) {
                 c.loss_cap = parse_number<double>(v, "loss_cap");
             }},
            {"interpreter_head",
             [](PipelineConfig& c, const std::string& v) { c.interpreter_head = v; }},
            {"seed",
             [](PipelineConfig& c, const std::string& v) {
                 c.seed = parse_number<std::uint64_t>(v, "seed");
             }},
        };
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, value);
}

inline void validate_config(const PipelineConfig& cfg) {
    if (cfg.feature_count <= 0 || cfg.feature_count % 8 != 0)
        throw ConfigError("feature_count: must be a positive multiple of 8");
    if (cfg.top_k < 1 || cfg.top_k > cfg.feature_count)
        throw ConfigError("top_k: must satisfy 1 <= top_k <= feature_count");
    if (cfg.theta < 1) throw ConfigError("theta: must be >= 1");
    if (cfg.num_candidates < 1) throw ConfigError("num_candidates: must be >= 1");
    if (cfg.optimizer != "adam" && cfg.optimizer != "sgd")
        throw ConfigError("optimizer: expected 'adam' or 'sgd'");
    if (cfg.mixup_optimizer != "adam" && cfg.mixup_optimizer != "sgd")
        throw ConfigError("mixup_optimizer: expected 'adam' or 'sgd'");
    if (cfg.mixup_learning_rate <= 0.0)
        throw ConfigError("mixup_learning_rate: must be positive");
    if (cfg.interpreter_head != "sigmoid" && cfg.interpreter_head != "softmax")
        throw ConfigError("interpreter_head: expected 'sigmoid' or 'softmax'");
    if (cfg.mixup_alpha <= 0.0) throw ConfigError("mixup_alpha: must be positive");
    if (cfg.learning_rate <= 0.0) throw ConfigError("learning_rate: must be positive");
    if (cfg.interpreter_learning_rate <= 0.0)
        throw ConfigError("interpreter_learning_rate: must be positive");
    if (cfg.batch_size < 1) throw ConfigError("batch_size: must be >= 1");
    if (cfg.rounds < 1) throw ConfigError("rounds: must be >= 1");
    if (cfg.num_classes < 1) throw ConfigError("num_classes: must be >= 1");
}

// One `key = value` per line; `#` starts a comment. Values may be quoted.
inline PipelineConfig parse_config_text(const std::string& text) {
    PipelineConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        bool in_quote = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_quote = !in_quote;
            if (line[i] == '#' && !in_quote) {
                line = line.substr(0, i);
                break;
            }
        }
        auto trim = [](std::string s) {
            const char* ws = " \t\r";
            auto a = s.find_first_not_of(ws);
            if (a == std::string::npos) return std::string();
            auto b = s.find_last_not_of(ws);
            return s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        set_config_field(cfg, key, value);
    }
    validate_config(cfg);
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

// ---------------------------------------------------------------------------
// Conversions into per-module configs
// ---------------------------------------------------------------------------

inline CorpusSpec to_corpus_spec(const PipelineConfig& cfg) {
    CorpusSpec spec;
    spec.num_classes = cfg.num_classes;
    spec.examples_per_class = cfg.examples_per_class;
    return spec;
}

inline SplitSpec to_split_spec(const PipelineConfig& cfg) {
    SplitSpec spec;
    spec.train = cfg.split_train;
    spec.val = cfg.split_val;
    spec.test = cfg.split_test;
    spec.seed = derive_seed(cfg.seed, "split");
    spec.allow_empty = cfg.allow_empty_splits;
    return spec;
}

inline ClassifierConfig to_classifier_config(const PipelineConfig& cfg) {
    ClassifierConfig c;
    c.hidden = cfg.classifier_hidden;
    c.max_epochs = cfg.classifier_epochs;
    c.patience = cfg.classifier_patience;
    c.batch_size = cfg.batch_size;
    c.learning_rate = cfg.learning_rate;
    c.optimizer = cfg.optimizer == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
    return c;
}

inline InterpreterTrainConfig to_interpreter_config(const PipelineConfig& cfg) {
    InterpreterTrainConfig c;
    c.hidden = cfg.interpreter_hidden;
    c.max_rounds = cfg.rounds;
    c.convergence_tol = cfg.convergence_tol;
    c.convergence_patience = cfg.convergence_patience;
    c.batch_size = cfg.batch_size;
    c.interpreter_learning_rate = cfg.interpreter_learning_rate;
    c.approx_learning_rate = cfg.learning_rate;
    c.optimizer = cfg.optimizer == "sgd" ? OptimizerKind::Sgd : OptimizerKind::Adam;
    c.factor1 = cfg.factor1;
    c.factor2 = cfg.factor2;
    c.mixup_epochs = cfg.mixup_epochs;
    c.mixup_alpha = cfg.mixup_alpha;
    c.mixup_optimizer =
        cfg.mixup_optimizer == "adam" ? OptimizerKind::Adam : OptimizerKind::Sgd;
    c.mixup_learning_rate = cfg.mixup_learning_rate;
    c.loss_cap = cfg.loss_cap;
    c.interpreter_head = cfg.interpreter_head == "softmax" ? OutputHead::Softmax
                                                           : OutputHead::Sigmoid;
    c.k = cfg.top_k;
    return c;
}

}  // namespace robin
