#pragma once

#include <string>
#include <vector>

namespace robin {

enum class ExampleOrigin { Synthetic, Ingested, Perturbed };

inline const char* origin_name(ExampleOrigin o) {
    switch (o) {
        case ExampleOrigin::Synthetic: return "synthetic";
        case ExampleOrigin::Ingested: return "ingested";
        case ExampleOrigin::Perturbed: return "perturbed";
    }
    return "?";
}

// One labeled program. `origin_id` names the parent example when the origin
// is Perturbed.
struct CodeExample {
    std::string id;
    std::string source;
    int label = 0;
    ExampleOrigin origin = ExampleOrigin::Synthetic;
    std::string origin_id;
};

struct Corpus {
    std::vector<CodeExample> examples;
    int num_classes = 0;
    std::vector<std::string> label_names;  // dense index -> original label string

    std::size_t size() const { return examples.size(); }
};

}  // namespace robin
