// Command-line pipeline: corpus generation, classifier training, perturbation,
// interpreter training, single-example explanation, and evaluation. Stages
// compose through a JSON checkpoint in the output directory.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "robin/robin.hpp"

namespace fs = std::filesystem;
using namespace robin;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = "out";
    std::vector<std::string> overrides;
};

PipelineConfig resolve_config(const GlobalOptions& g) {
    PipelineConfig cfg;
    if (!g.config_path.empty()) cfg = load_config(g.config_path);
    for (const auto& kv : g.overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        set_config_field(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) cfg.seed = *g.seed;
    validate_config(cfg);
    return cfg;
}

fs::path checkpoint_path(const GlobalOptions& g) {
    return fs::path(g.out) / "checkpoint.json";
}

Checkpoint load_checkpoint_or_die(const GlobalOptions& g) {
    const fs::path path = checkpoint_path(g);
    if (!fs::exists(path))
        throw CheckpointError("missing " + path.string() +
                              "; run train-classifier first");
    return load_checkpoint(path);
}

int cmd_gen_corpus(const GlobalOptions& g) {
    PipelineConfig cfg = resolve_config(g);
    Corpus corpus =
        generate_corpus(to_corpus_spec(cfg), derive_seed(cfg.seed, "corpus"));
    const fs::path dir = fs::path(g.out) / "corpus";
    write_corpus(corpus, dir);
    std::cout << "wrote " << corpus.examples.size() << " examples ("
              << corpus.num_classes << " classes) to " << dir.string() << "\n";
    return 0;
}

int cmd_train_classifier(const GlobalOptions& g) {
    PipelineConfig cfg = resolve_config(g);
    fs::create_directories(g.out);
    if (cfg.manifest.empty()) {
        const fs::path generated = fs::path(g.out) / "corpus" / "manifest.jsonl";
        if (fs::exists(generated)) cfg.manifest = generated.string();
    }
    Checkpoint ck = pipeline::run_train_classifier(cfg, g.out);
    save_checkpoint(ck, checkpoint_path(g));
    std::cout << "classifier trained: train acc "
              << ck.classifier.train_accuracy << ", val acc "
              << ck.classifier.val_accuracy << ", test acc " << ck.test_accuracy
              << "\n"
              << "checkpoint: " << checkpoint_path(g).string() << "\n";
    return 0;
}

int cmd_perturb(const GlobalOptions& g) {
    Checkpoint ck = load_checkpoint_or_die(g);
    pipeline::PerturbStats stats = pipeline::run_perturb(ck, g.out);
    std::cout << "perturbation: " << stats.survivors << "/" << stats.candidates
              << " candidates survive the prediction-preserving filter (rate "
              << stats.survival_rate() << ", " << stats.skipped_examples
              << " examples skipped)\n";
    return 0;
}

int cmd_train_interpreter(const GlobalOptions& g, bool no_factor1, bool no_factor2) {
    Checkpoint ck = load_checkpoint_or_die(g);
    const fs::path train_manifest = fs::path(g.out) / "perturbed-train" / "manifest.jsonl";
    const fs::path val_manifest = fs::path(g.out) / "perturbed-val" / "manifest.jsonl";
    if (!fs::exists(train_manifest))
        throw CheckpointError("missing " + train_manifest.string() +
                              "; run perturb first");

    Corpus corpus = ingest_corpus(ck.corpus_manifest, &ck.label_names).corpus;
    Corpus train = pipeline::select_by_ids(corpus, ck.train_ids);
    Corpus val = pipeline::select_by_ids(corpus, ck.val_ids);

    auto train_sets = pipeline::load_perturbed_sets(ck.classifier, train, train_manifest);
    std::vector<PerturbedSet> val_sets;
    if (fs::exists(val_manifest))
        val_sets = pipeline::load_perturbed_sets(ck.classifier, val, val_manifest);

    InterpreterTrainConfig icfg = to_interpreter_config(ck.config);
    if (no_factor1) icfg.factor1 = false;
    if (no_factor2) icfg.factor2 = false;

    const std::string name = pipeline::run_train_interpreter(
        ck, train_sets, val_sets, icfg,
        fs::path(g.out) / ("train-log-" + pipeline::variant_name(icfg.factor1,
                                                                 icfg.factor2) +
                           ".jsonl"));
    save_checkpoint(ck, checkpoint_path(g));
    std::cout << "trained interpreter variant '" << name << "' ("
              << ck.interpreters[name].history.size() << " logged phases)\n";
    return 0;
}

int cmd_explain(const GlobalOptions& g, const std::string& source_path, int k,
                const std::string& variant) {
    Checkpoint ck = load_checkpoint_or_die(g);
    auto it = ck.interpreters.find(variant);
    if (it == ck.interpreters.end())
        throw CheckpointError("checkpoint has no interpreter variant '" + variant +
                              "'; run train-interpreter first");
    std::ifstream in(source_path, std::ios::binary);
    if (!in) throw IngestError("cannot read " + source_path);
    std::ostringstream buf;
    buf << in.rdbuf();

    CodeExample ex;
    ex.id = source_path;
    ex.source = buf.str();
    FeatureVector fv = featurize(ck.classifier.featurizer, ex);
    auto [label, probs] = predict(ck.classifier, fv.values);
    auto [scores, top] = explain(it->second, fv, k > 0 ? k : it->second.k);

    std::cout << "prediction: class " << label;
    if (label < static_cast<int>(ck.label_names.size()))
        std::cout << " (" << ck.label_names[label] << ")";
    std::cout << ", p = " << probs[label] << "\n";
    std::cout << "top " << top.size() << " important features:\n";
    std::vector<int> ranked(top.begin(), top.end());
    std::stable_sort(ranked.begin(), ranked.end(), [&](int a, int b) {
        return scores.scores[a] > scores.scores[b];
    });
    int rank = 1;
    for (int idx : ranked) {
        std::cout << "  " << rank++ << ". " << ck.classifier.featurizer.vocabulary[idx]
                  << "  (score " << scores.scores[idx] << ", tf-idf " << fv.values[idx]
                  << ")\n";
    }
    return 0;
}

int cmd_evaluate(const GlobalOptions& g, const std::vector<std::string>& only) {
    Checkpoint ck = load_checkpoint_or_die(g);
    nlohmann::json report = pipeline::run_evaluate(
        ck, std::set<std::string>(only.begin(), only.end()));
    const fs::path json_path = fs::path(g.out) / "report.json";
    const fs::path md_path = fs::path(g.out) / "report.md";
    std::ofstream(json_path) << report.dump(1) << "\n";
    const std::string md = pipeline::report_markdown(report);
    std::ofstream(md_path) << md;
    std::cout << md << "\nreport: " << json_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"robin: robust post-hoc interpreters for code classifiers"};
    app.require_subcommand(1);

    GlobalOptions g;
    app.add_option("--config", g.config_path, "configuration file (key = value lines)");
    app.add_option("--seed", g.seed, "override the global seed");
    app.add_option("--out", g.out, "output directory (default: out)");
    app.add_option("--set", g.overrides, "override a config key (key=value)");

    auto* gen = app.add_subcommand("gen-corpus", "generate the synthetic corpus");
    auto* trainc = app.add_subcommand("train-classifier",
                                      "split, featurize, and train the classifier");
    auto* perturb = app.add_subcommand(
        "perturb", "generate prediction-preserving perturbed examples");
    auto* traini =
        app.add_subcommand("train-interpreter", "train the interpreter on the "
                                                "perturbed corpus");
    bool no_factor1 = false, no_factor2 = false;
    traini->add_flag("--no-factor1", no_factor1,
                     "drop the Jaccard discrepancy term from the interpreter loss");
    traini->add_flag("--no-factor2", no_factor2, "skip the mixup optimization phase");

    auto* explain_cmd =
        app.add_subcommand("explain", "rank the important features of one source file");
    std::string source_path, variant = "robin";
    int explain_k = 0;
    explain_cmd->add_option("source", source_path, "C source file")->required();
    explain_cmd->add_option("--k", explain_k, "number of features to list");
    explain_cmd->add_option("--variant", variant, "interpreter variant (default robin)");

    auto* eval = app.add_subcommand("evaluate", "compute fidelity, robustness, and "
                                                "out-of-distribution metrics");
    std::vector<std::string> eval_only;
    eval->add_option("--interpreter", eval_only,
                     "evaluate only these interpreters (default: all)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_gen_corpus(g);
        if (trainc->parsed()) return cmd_train_classifier(g);
        if (perturb->parsed()) return cmd_perturb(g);
        if (traini->parsed()) return cmd_train_interpreter(g, no_factor1, no_factor2);
        if (explain_cmd->parsed()) return cmd_explain(g, source_path, explain_k, variant);
        if (eval->parsed()) return cmd_evaluate(g, eval_only);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
