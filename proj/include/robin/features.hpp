#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "robin/errors.hpp"
#include "robin/example.hpp"
#include "robin/lexer.hpp"

namespace robin {

struct FeatureVector {
    Eigen::VectorXd values;
    std::string example_id;
};

// Token-unigram TF-IDF over non-whitespace, non-comment tokens. Identifiers
// are kept verbatim so renames genuinely move the vector.
struct Featurizer {
    std::vector<std::string> vocabulary;
    Eigen::VectorXd idf;
    int n = 0;

    std::map<std::string, int> term_index;

    void rebuild_index() {
        term_index.clear();
        for (std::size_t i = 0; i < vocabulary.size(); ++i)
            term_index[vocabulary[i]] = static_cast<int>(i);
    }
};

inline Featurizer fit_featurizer(const Corpus& train, int n) {
    if (n <= 0 || n % 8 != 0)
        throw ConfigError("feature_count: must be a positive multiple of 8, got " +
                          std::to_string(n));
    if (train.examples.empty())
        throw ConfigError("featurizer: training corpus is empty");

    std::map<std::string, int> df;
    for (const auto& ex : train.examples) {
        TokenStream s = tokenize(ex.source);
        std::map<std::string, bool> seen;
        for (const auto& t : s.tokens) {
            if (t.is_ws_or_comment()) continue;
            if (!seen.count(t.text)) {
                seen[t.text] = true;
                df[t.text] += 1;
            }
        }
    }

    std::vector<std::pair<std::string, int>> terms(df.begin(), df.end());
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Featurizer f;
    f.n = n;
    f.idf = Eigen::VectorXd::Zero(n);
    const double d = static_cast<double>(train.examples.size());
    for (int j = 0; j < n; ++j) {
        if (j < static_cast<int>(terms.size())) {
            f.vocabulary.push_back(terms[j].first);
            f.idf[j] = std::log((1.0 + d) / (1.0 + terms[j].second)) + 1.0;
        } else {
            // Reserved padding terms: a space can never occur inside a token,
            // so these never match and score 0 everywhere.
            f.vocabulary.push_back("pad " + std::to_string(j));
            f.idf[j] = 0.0;
        }
    }
    f.rebuild_index();
    return f;
}

inline FeatureVector featurize(const Featurizer& f, const CodeExample& example) {
    TokenStream s = tokenize(example.source);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(f.n);
    for (const auto& t : s.tokens) {
        if (t.is_ws_or_comment()) continue;
        auto it = f.term_index.find(t.text);
        if (it != f.term_index.end()) v[it->second] += 1.0;
    }
    v = v.cwiseProduct(f.idf);
    double norm = v.norm();
    if (norm > 0.0) v /= norm;
    return {std::move(v), example.id};
}

inline std::vector<FeatureVector> featurize_all(const Featurizer& f,
                                                const Corpus& corpus) {
    std::vector<FeatureVector> out;
    out.reserve(corpus.examples.size());
    for (const auto& ex : corpus.examples) out.push_back(featurize(f, ex));
    return out;
}

}  // namespace robin
