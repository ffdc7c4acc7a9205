#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "robin/baselines.hpp"
#include "robin/checkpoint.hpp"
#include "robin/classifier.hpp"
#include "robin/config.hpp"
#include "robin/corpus.hpp"
#include "robin/errors.hpp"
#include "robin/features.hpp"
#include "robin/interpreter.hpp"
#include "robin/metrics.hpp"
#include "robin/version.hpp"

namespace robin {

namespace pipeline {

namespace fs = std::filesystem;

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------
// Corpus plumbing
// ---------------------------------------------------------------------------

inline Corpus load_or_generate_corpus(const PipelineConfig& cfg, std::string* manifest_used,
                                      const fs::path& out_dir) {
    if (!cfg.manifest.empty()) {
        IngestResult r = ingest_corpus(cfg.manifest);
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
        if (manifest_used) *manifest_used = cfg.manifest;
        return std::move(r.corpus);
    }
    Corpus corpus = generate_corpus(to_corpus_spec(cfg), derive_seed(cfg.seed, "corpus"));
    const fs::path dir = out_dir / "corpus";
    write_corpus(corpus, dir);
    if (manifest_used) *manifest_used = (dir / "manifest.jsonl").string();
    return corpus;
}

inline Corpus select_by_ids(const Corpus& corpus, const std::vector<std::string>& ids) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < corpus.examples.size(); ++i)
        index[corpus.examples[i].id] = i;
    Corpus out;
    out.num_classes = corpus.num_classes;
    out.label_names = corpus.label_names;
    for (const auto& id : ids) {
        auto it = index.find(id);
        if (it == index.end())
            throw IngestError("split references missing example id '" + id + "'");
        out.examples.push_back(corpus.examples[it->second]);
    }
    return out;
}

inline std::vector<std::string> id_list(const Corpus& corpus) {
    std::vector<std::string> ids;
    for (const auto& e : corpus.examples) ids.push_back(e.id);
    return ids;
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

inline Checkpoint run_train_classifier(const PipelineConfig& cfg,
                                       const fs::path& out_dir) {
    validate_config(cfg);
    Checkpoint ck;
    ck.seed = cfg.seed;
    ck.config = cfg;

    Corpus corpus = load_or_generate_corpus(cfg, &ck.corpus_manifest, out_dir);
    CorpusSplit split = split_corpus(corpus, to_split_spec(cfg));
    ck.label_names = corpus.label_names;
    ck.train_ids = id_list(split.train);
    ck.val_ids = id_list(split.val);
    ck.test_ids = id_list(split.test);

    Featurizer featurizer = fit_featurizer(split.train, cfg.feature_count);
    ck.classifier = train_classifier(split.train, split.val, featurizer,
                                     to_classifier_config(cfg),
                                     derive_seed(cfg.seed, "classifier"));
    ck.has_classifier = true;

    if (!split.test.examples.empty()) {
        std::vector<FeatureVector> ft = featurize_all(featurizer, split.test);
        std::vector<int> yt;
        for (const auto& e : split.test.examples) yt.push_back(e.label);
        ck.test_accuracy =
            accuracy(ck.classifier.net, detail::stack_features(ft), yt);
    }
    return ck;
}

struct PerturbStats {
    std::size_t candidates = 0;
    std::size_t survivors = 0;
    std::size_t skipped_examples = 0;
    double survival_rate() const {
        return candidates ? static_cast<double>(survivors) /
                                static_cast<double>(candidates)
                          : 0.0;
    }
};

// Step I over a corpus subset: candidate generation plus the
// prediction-preserving filter. Examples with too few attribute sites are
// skipped with a warning rather than aborting the stage.
inline std::vector<PerturbedSet> build_perturbed_sets(const ClassifierModel& m,
                                                      const Corpus& subset, int theta,
                                                      int num_candidates,
                                                      std::uint64_t seed,
                                                      PerturbStats* stats = nullptr) {
    std::vector<PerturbedSet> out;
    for (const auto& ex : subset.examples) {
        std::vector<Candidate> cands;
        try {
            cands = generate_candidates(ex, theta, num_candidates, seed);
        } catch (const TransformError& e) {
            std::cerr << "warning: skipping perturbation: " << e.what() << "\n";
            if (stats) ++stats->skipped_examples;
            continue;
        }
        PerturbedSet set = filter_prediction_preserving(m, ex, cands);
        if (stats) {
            stats->candidates += set.candidates_generated;
            stats->survivors += set.variants.size();
        }
        out.push_back(std::move(set));
    }
    return out;
}

inline void write_perturbed_corpus(const std::vector<PerturbedSet>& sets,
                                   const Corpus& base,
                                   const std::vector<Candidate>& all_candidates,
                                   const fs::path& dir) {
    Corpus perturbed;
    perturbed.num_classes = base.num_classes;
    perturbed.label_names = base.label_names;
    std::map<std::string, std::vector<TransformationRecord>> records;
    std::set<std::string> surviving;
    for (const auto& s : sets)
        for (const auto& v : s.variant_examples) surviving.insert(v.id);
    for (const auto& c : all_candidates) {
        if (!surviving.count(c.example.id)) continue;
        perturbed.examples.push_back(c.example);
        records[c.example.id] = c.records;
    }
    write_corpus(perturbed, dir, records);
}

// Perturbs the train and val splits, writing replayable perturbed corpora.
inline PerturbStats run_perturb(const Checkpoint& ck, const fs::path& out_dir) {
    if (!ck.has_classifier)
        throw CheckpointError("perturb requires a trained classifier checkpoint; run "
                              "train-classifier first");
    Corpus corpus =
        ingest_corpus(ck.corpus_manifest, &ck.label_names).corpus;
    PerturbStats stats;
    for (const auto& [name, ids] :
         std::vector<std::pair<std::string, const std::vector<std::string>*>>{
             {"train", &ck.train_ids}, {"val", &ck.val_ids}}) {
        Corpus subset = select_by_ids(corpus, *ids);
        const std::uint64_t seed = derive_seed(ck.seed, "perturb-" + name);

        std::vector<Candidate> all;
        std::vector<PerturbedSet> sets;
        for (const auto& ex : subset.examples) {
            std::vector<Candidate> cands;
            try {
                cands = generate_candidates(ex, ck.config.theta,
                                            ck.config.num_candidates, seed);
            } catch (const TransformError& e) {
                std::cerr << "warning: skipping perturbation: " << e.what() << "\n";
                ++stats.skipped_examples;
                continue;
            }
            PerturbedSet set = filter_prediction_preserving(ck.classifier, ex, cands);
            stats.candidates += set.candidates_generated;
            stats.survivors += set.variants.size();
            for (auto& c : cands) all.push_back(std::move(c));
            sets.push_back(std::move(set));
        }
        write_perturbed_corpus(sets, subset, all, out_dir / ("perturbed-" + name));
    }

    nlohmann::json j{{"candidates", stats.candidates},
                     {"survivors", stats.survivors},
                     {"survival_rate", stats.survival_rate()},
                     {"skipped_examples", stats.skipped_examples}};
    std::ofstream(out_dir / "perturb-stats.json") << j.dump(1) << "\n";
    return stats;
}

// Reassembles PerturbedSets from a perturbed-corpus manifest written by
// run_perturb.
inline std::vector<PerturbedSet> load_perturbed_sets(const ClassifierModel& m,
                                                     const Corpus& originals,
                                                     const fs::path& manifest) {
    IngestResult r = ingest_corpus(manifest, &originals.label_names);
    for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
    std::map<std::string, std::vector<const CodeExample*>> by_origin;
    for (const auto& ex : r.corpus.examples)
        if (ex.origin == ExampleOrigin::Perturbed)
            by_origin[ex.origin_id].push_back(&ex);

    std::vector<PerturbedSet> out;
    for (const auto& orig : originals.examples) {
        PerturbedSet set;
        set.original_example = orig;
        set.original = featurize(m.featurizer, orig);
        auto it = by_origin.find(orig.id);
        if (it != by_origin.end()) {
            for (const CodeExample* v : it->second) {
                set.variant_examples.push_back(*v);
                set.variants.push_back(featurize(m.featurizer, *v));
            }
        }
        set.candidates_generated = set.variants.size();
        out.push_back(std::move(set));
    }
    return out;
}

inline std::string variant_name(bool factor1, bool factor2) {
    if (factor1 && factor2) return "robin";
    if (!factor1 && factor2) return "robin_wo_factor1";
    if (factor1 && !factor2) return "robin_wo_factor2";
    return "robin_wo_factor12";
}

// Trains one interpreter variant (Step II, then Step III unless factor2 is
// off) and stores it in the checkpoint under its variant name.
inline std::string run_train_interpreter(Checkpoint& ck,
                                         const std::vector<PerturbedSet>& train_sets,
                                         const std::vector<PerturbedSet>& val_sets,
                                         const InterpreterTrainConfig& icfg,
                                         const fs::path& log_path = {}) {
    if (!ck.has_classifier)
        throw CheckpointError("train-interpreter requires a trained classifier");
    const std::uint64_t seed = derive_seed(ck.seed, "interpreter");
    InterpreterModel model = train_preliminary(ck.classifier, train_sets, val_sets,
                                               icfg, seed);
    if (icfg.factor2) optimize_with_mixup(model, train_sets, icfg, seed);

    if (!log_path.empty()) {
        std::ofstream log(log_path);
        for (const auto& h : model.history) {
            nlohmann::json j{{"round", h.round},
                             {"phase", phase_name(h.phase)},
                             {"l_s", h.l_s},
                             {"l_u", h.l_u},
                             {"l_diff", h.l_diff}};
            log << j.dump() << "\n";
        }
    }

    const std::string name = variant_name(icfg.factor1, icfg.factor2);
    ck.interpreters[name] = std::move(model);
    return name;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

// A_s for interpreters that do not train their own: the classifier
// architecture retrained on the train split restricted to the union of
// important features over the test set.
inline DenseNet train_union_masked_approximator(const ClassifierModel& m,
                                                const Corpus& train,
                                                const std::set<int>& union_features,
                                                std::uint64_t seed) {
    std::vector<FeatureVector> ftr = featurize_all(m.featurizer, train);
    std::vector<int> ytr;
    for (const auto& e : train.examples) ytr.push_back(e.label);
    Eigen::MatrixXd x = detail::stack_features(ftr);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        if (!union_features.count(static_cast<int>(r))) x.row(r).setZero();
    }
    auto trained = detail::train_softmax_net(x, ytr,
                                             Eigen::MatrixXd(m.featurizer.n, 0), {},
                                             m.num_classes, m.config, seed);
    return std::move(trained.net);
}

struct InterpreterEvaluation {
    FidelityReport fidelity;
    RobustnessReport robustness;
    std::optional<AblationReport> ablation;
};

struct EvaluationInputs {
    const ClassifierModel* classifier = nullptr;
    Corpus train;
    Corpus test;
    std::vector<FeatureVector> train_features;
    std::vector<FeatureVector> test_features;
    std::vector<PerturbedSet> test_sets;  // shared across interpreters
    int k = 10;
    std::uint64_t seed = 0;
};

inline EvaluationInputs prepare_evaluation_inputs(const Checkpoint& ck,
                                                  PerturbStats* stats = nullptr) {
    EvaluationInputs in;
    in.classifier = &ck.classifier;
    Corpus corpus = ingest_corpus(ck.corpus_manifest, &ck.label_names).corpus;
    in.train = select_by_ids(corpus, ck.train_ids);
    in.test = select_by_ids(corpus, ck.test_ids);
    in.train_features = featurize_all(ck.classifier.featurizer, in.train);
    in.test_features = featurize_all(ck.classifier.featurizer, in.test);
    in.k = ck.config.top_k;
    in.seed = ck.seed;
    // Test-time pairs reuse the Step-I machinery with an independent seed.
    in.test_sets = build_perturbed_sets(ck.classifier, in.test, ck.config.theta,
                                        ck.config.num_candidates,
                                        derive_seed(ck.seed, "eval-perturb"), stats);
    return in;
}

inline InterpreterEvaluation evaluate_interpreter(const EvaluationInputs& in,
                                                  const ExplainFn& explain_fn,
                                                  const ImportanceFn& importance_fn,
                                                  const DenseNet* approx_s,
                                                  bool with_ablation,
                                                  std::uint64_t as_seed) {
    InterpreterEvaluation out;
    DenseNet protocol_as;
    if (!approx_s) {
        std::set<int> union_features;
        for (const auto& fv : in.test_features)
            for (int idx : explain_fn(fv)) union_features.insert(idx);
        protocol_as = train_union_masked_approximator(*in.classifier, in.train,
                                                      union_features, as_seed);
        approx_s = &protocol_as;
    }
    out.fidelity = fidelity(*in.classifier, *approx_s, explain_fn, in.test_features,
                            in.k);
    out.robustness = robustness(explain_fn, in.test_sets, in.k);
    if (with_ablation) {
        const ClassifierModel& m = *in.classifier;
        RetrainFn retrain = [&](const std::map<std::string, std::vector<int>>& masks,
                                int q) {
            return retrain_ablated(m, in.train, masks, q,
                                   derive_seed(in.seed, "ablation", q));
        };
        out.ablation =
            ablation_curve(m, importance_fn, in.train_features, in.test_features,
                           ablation_grid(m.featurizer.n), retrain);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

inline nlohmann::json evaluation_to_json(const InterpreterEvaluation& ev) {
    nlohmann::json j;
    j["fidelity"] = {{"fs_m", ev.fidelity.fs_m},
                     {"fs_a", ev.fidelity.fs_a},
                     {"k", ev.fidelity.k},
                     {"num_examples", ev.fidelity.num_examples}};
    j["robustness"] = {{"mean_jaccard", ev.robustness.mean_jaccard},
                       {"num_pairs", ev.robustness.num_pairs},
                       {"survival_rate", ev.robustness.survival_rate}};
    if (ev.ablation) {
        j["ablation"] = {{"grid", ev.ablation->grid},
                         {"ad_q", ev.ablation->ad_q},
                         {"average_ad", ev.ablation->average_ad},
                         {"abs_average_ad", std::abs(ev.ablation->average_ad)},
                         {"retrained_accuracies", ev.ablation->retrained_accuracies}};
    }
    return j;
}

// Full evaluation: every trained robin variant plus the random and occlusion
// baselines, or the subset named in `only`. AD_q curves are computed for
// robin, random, and occlusion.
inline nlohmann::json run_evaluate(const Checkpoint& ck,
                                   const std::set<std::string>& only = {}) {
    auto wanted = [&only](const std::string& name) {
        return only.empty() || only.count(name) > 0;
    };
    if (!ck.has_classifier)
        throw CheckpointError("evaluate requires a trained classifier");
    if (ck.interpreters.empty())
        throw CheckpointError("evaluate requires at least one trained interpreter; "
                              "run train-interpreter first");

    auto t0 = std::chrono::steady_clock::now();
    nlohmann::json report;
    report["artifact_version"] = kArtifactVersion;
    report["schema_version"] = kCheckpointSchemaVersion;
    report["seed"] = ck.seed;
    report["config"] = detail::config_to_json(ck.config);
    report["classifier"] = {{"train_accuracy", ck.classifier.train_accuracy},
                            {"val_accuracy", ck.classifier.val_accuracy},
                            {"test_accuracy", ck.test_accuracy}};

    PerturbStats stats;
    EvaluationInputs in = prepare_evaluation_inputs(ck, &stats);
    report["perturbation"] = {{"candidates", stats.candidates},
                              {"survivors", stats.survivors},
                              {"survival_rate", stats.survival_rate()},
                              {"skipped_examples", stats.skipped_examples}};
    nlohmann::json wall;
    wall["prepare"] = seconds_since(t0);

    const int n = ck.classifier.featurizer.n;
    nlohmann::json interpreters;

    for (const auto& [name, model] : ck.interpreters) {
        if (!wanted(name)) continue;
        auto tv = std::chrono::steady_clock::now();
        ExplainFn explain_fn = [&model](const FeatureVector& fv) {
            return explain(model, fv, model.k).second;
        };
        ImportanceFn importance_fn = [&model](const FeatureVector& fv) {
            return forward(model.interpreter, fv.values);
        };
        const bool with_ablation = name == "robin";
        InterpreterEvaluation ev = evaluate_interpreter(
            in, explain_fn, importance_fn, &model.approx_s, with_ablation, 0);
        interpreters[name] = evaluation_to_json(ev);
        wall[name] = seconds_since(tv);
    }

    if (wanted("random")) {
        auto tv = std::chrono::steady_clock::now();
        const std::uint64_t rseed = derive_seed(ck.seed, "random-baseline");
        ExplainFn explain_fn = [&, rseed](const FeatureVector& fv) {
            return random_explain(fv, in.k, rseed);
        };
        ImportanceFn importance_fn = [&, rseed](const FeatureVector& fv) {
            return random_importance(fv.example_id, n, rseed).scores;
        };
        InterpreterEvaluation ev =
            evaluate_interpreter(in, explain_fn, importance_fn, nullptr, true,
                                 derive_seed(ck.seed, "fidelity-as-random"));
        interpreters["random"] = evaluation_to_json(ev);
        wall["random"] = seconds_since(tv);
    }

    if (wanted("occlusion")) {
        auto tv = std::chrono::steady_clock::now();
        auto cache = std::make_shared<std::map<std::string, OcclusionResult>>();
        const ClassifierModel& m = ck.classifier;
        auto get = [cache, &m, k = in.k](const FeatureVector& fv) -> const OcclusionResult& {
            auto it = cache->find(fv.example_id);
            if (it == cache->end())
                it = cache->emplace(fv.example_id, occlusion_explain(m, fv, k)).first;
            return it->second;
        };
        ExplainFn explain_fn = [get](const FeatureVector& fv) { return get(fv).top; };
        ImportanceFn importance_fn = [get](const FeatureVector& fv) {
            return get(fv).raw_scores;
        };
        InterpreterEvaluation ev =
            evaluate_interpreter(in, explain_fn, importance_fn, nullptr, true,
                                 derive_seed(ck.seed, "fidelity-as-occlusion"));
        interpreters["occlusion"] = evaluation_to_json(ev);
        wall["occlusion"] = seconds_since(tv);
    }

    if (interpreters.empty())
        throw ConfigError("evaluate: no interpreter matches the requested set");
    report["interpreters"] = interpreters;
    wall["total"] = seconds_since(t0);
    report["wall_clock_seconds"] = wall;
    return report;
}

// Timing fields are the only permitted difference between two runs with the
// same seed.
inline nlohmann::json strip_timing(nlohmann::json report) {
    report.erase("wall_clock_seconds");
    return report;
}

inline std::string format_cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

// Markdown mirror of the JSON report: one row per interpreter, one column
// per metric present in the JSON.
inline std::string report_markdown(const nlohmann::json& report) {
    std::ostringstream md;
    md << "# Evaluation report\n\n";
    md << "- seed: " << report["seed"] << "\n";
    md << "- classifier accuracy (train/val/test): "
       << format_cell(report["classifier"]["train_accuracy"].get<double>()) << " / "
       << format_cell(report["classifier"]["val_accuracy"].get<double>()) << " / "
       << format_cell(report["classifier"]["test_accuracy"].get<double>()) << "\n";
    md << "- test perturbation survival rate: "
       << format_cell(report["perturbation"]["survival_rate"].get<double>()) << " ("
       << report["perturbation"]["survivors"] << "/"
       << report["perturbation"]["candidates"] << ")\n\n";

    md << "| interpreter | FS-M | FS-A | robustness | avg AD_q | |avg AD_q| |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& [name, ev] : report["interpreters"].items()) {
        md << "| " << name << " | "
           << format_cell(ev["fidelity"]["fs_m"].get<double>()) << " | "
           << format_cell(ev["fidelity"]["fs_a"].get<double>()) << " | "
           << format_cell(ev["robustness"]["mean_jaccard"].get<double>()) << " | ";
        if (ev.contains("ablation")) {
            md << format_cell(ev["ablation"]["average_ad"].get<double>()) << " | "
               << format_cell(ev["ablation"]["abs_average_ad"].get<double>()) << " |\n";
        } else {
            md << "- | - |\n";
        }
    }

    bool any_ablation = false;
    for (const auto& [name, ev] : report["interpreters"].items())
        if (ev.contains("ablation")) any_ablation = true;
    if (any_ablation) {
        md << "\n## AD_q curves\n\n| interpreter |";
        const auto& first = report["interpreters"].begin().value();
        std::vector<int> grid;
        for (const auto& [name, ev] : report["interpreters"].items()) {
            if (ev.contains("ablation")) {
                grid = ev["ablation"]["grid"].get<std::vector<int>>();
                break;
            }
        }
        (void)first;
        for (int q : grid) md << " q=" << q << " |";
        md << "\n|---|";
        for (std::size_t i = 0; i < grid.size(); ++i) md << "---|";
        md << "\n";
        for (const auto& [name, ev] : report["interpreters"].items()) {
            if (!ev.contains("ablation")) continue;
            md << "| " << name << " |";
            for (const auto& v : ev["ablation"]["ad_q"])
                md << " " << format_cell(v.get<double>()) << " |";
            md << "\n";
        }
    }
    return md.str();
}

}  // namespace pipeline

}  // namespace robin
