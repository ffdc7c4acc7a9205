#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "robin/corpus.hpp"
#include "robin/lexer.hpp"

using namespace robin;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("robin-corpus-test-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream(p, std::ios::binary) << content;
}

}  // namespace

TEST(GenerateCorpusTest, CountingContract) {
    CorpusSpec spec;
    spec.num_classes = 2;
    spec.examples_per_class = 2;
    spec.templates = {"sum-array", "max-array"};
    Corpus c = generate_corpus(spec, 7);
    ASSERT_EQ(c.examples.size(), 4u);
    std::vector<int> labels;
    for (const auto& e : c.examples) labels.push_back(e.label);
    EXPECT_EQ(labels, (std::vector<int>{0, 0, 1, 1}));
    EXPECT_EQ(c.num_classes, 2);
}

TEST(GenerateCorpusTest, ByteIdenticalForSameSeed) {
    CorpusSpec spec;
    spec.num_classes = 5;
    spec.examples_per_class = 3;
    Corpus a = generate_corpus(spec, 7);
    Corpus b = generate_corpus(spec, 7);
    ASSERT_EQ(a.examples.size(), b.examples.size());
    for (std::size_t i = 0; i < a.examples.size(); ++i) {
        EXPECT_EQ(a.examples[i].id, b.examples[i].id);
        EXPECT_EQ(a.examples[i].source, b.examples[i].source);
    }
}

TEST(GenerateCorpusTest, DefaultScaleAllTokenize) {
    CorpusSpec spec;
    spec.num_classes = 10;
    spec.examples_per_class = 50;
    Corpus c = generate_corpus(spec, 1);
    ASSERT_EQ(c.examples.size(), 500u);
    std::size_t failures = 0;
    for (const auto& e : c.examples) {
        if (!lexes(e.source)) ++failures;
        EXPECT_EQ(e.label, e.label);  // label equals template class by construction
    }
    EXPECT_EQ(failures, 0u);
    // Template class == label: ids carry the template name.
    for (const auto& e : c.examples)
        EXPECT_EQ(e.id.rfind(c.label_names[e.label] + "-", 0), 0u) << e.id;
}

TEST(GenerateCorpusTest, InvalidSpecNamesField) {
    CorpusSpec spec;
    spec.num_classes = 40;  // more than available templates
    try {
        generate_corpus(spec, 1);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("num_classes"), std::string::npos);
    }
    spec.num_classes = 2;
    spec.examples_per_class = 1;
    try {
        generate_corpus(spec, 1);
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("examples_per_class"), std::string::npos);
    }
}

TEST(IngestTest, ThreeRowsTwoLabels) {
    fs::path dir = temp_dir("ingest3");
    write_file(dir / "a.c", "int f() { return 1; }");
    write_file(dir / "b.c", "int g() { return 2; }");
    write_file(dir / "c.c", "int h() { return 3; }");
    write_file(dir / "manifest.jsonl",
               R"({"id":"a","path":"a.c","label":"x"})" "\n"
               R"({"id":"b","path":"b.c","label":"y"})" "\n"
               R"({"id":"c","path":"c.c","label":"x"})" "\n");
    IngestResult r = ingest_corpus(dir / "manifest.jsonl");
    EXPECT_EQ(r.corpus.examples.size(), 3u);
    EXPECT_EQ(r.corpus.num_classes, 2);
    EXPECT_EQ(r.corpus.label_names, (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(r.corpus.examples[2].label, 0);  // first-seen order
}

TEST(IngestTest, EmptyManifestErrors) {
    fs::path dir = temp_dir("ingest-empty");
    write_file(dir / "manifest.jsonl", "");
    try {
        ingest_corpus(dir / "manifest.jsonl");
        FAIL() << "expected IngestError";
    } catch (const IngestError& e) {
        EXPECT_NE(std::string(e.what()).find("no examples"), std::string::npos);
    }
}

TEST(IngestTest, BadTokenizeRowRejectedWithWarning) {
    fs::path dir = temp_dir("ingest-lex");
    write_file(dir / "a.c", "int f() { return 1; }");
    write_file(dir / "bad.c", "int s = \"unterminated");
    write_file(dir / "manifest.jsonl",
               R"({"id":"a","path":"a.c","label":"x"})" "\n"
               R"({"id":"bad","path":"bad.c","label":"x"})" "\n");
    IngestResult r = ingest_corpus(dir / "manifest.jsonl");
    EXPECT_EQ(r.corpus.examples.size(), 1u);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("bad"), std::string::npos);
}

TEST(IngestTest, DuplicateAndMissingListedTogether) {
    fs::path dir = temp_dir("ingest-errs");
    write_file(dir / "a.c", "int f() { return 1; }");
    write_file(dir / "manifest.jsonl",
               R"({"id":"a","path":"a.c","label":"x"})" "\n"
               R"({"id":"a","path":"a.c","label":"x"})" "\n"
               R"({"id":"b","path":"missing.c","label":"x"})" "\n");
    try {
        ingest_corpus(dir / "manifest.jsonl");
        FAIL() << "expected IngestError";
    } catch (const IngestError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("duplicate id 'a'"), std::string::npos);
        EXPECT_NE(msg.find("missing.c"), std::string::npos);
    }
}

TEST(SplitTest, PaperRatioSizes) {
    CorpusSpec spec;
    spec.num_classes = 10;
    spec.examples_per_class = 10;
    Corpus c = generate_corpus(spec, 2);  // 100 examples
    SplitSpec ss;
    ss.seed = 3;
    CorpusSplit split = split_corpus(c, ss);
    EXPECT_EQ(split.train.examples.size(), 60u);
    EXPECT_EQ(split.val.examples.size(), 20u);
    EXPECT_EQ(split.test.examples.size(), 20u);

    // Disjoint and exhaustive.
    std::set<std::string> seen;
    for (const Corpus* part : {&split.train, &split.val, &split.test})
        for (const auto& e : part->examples) EXPECT_TRUE(seen.insert(e.id).second);
    EXPECT_EQ(seen.size(), 100u);

    // Class balance within +/- 1 per class.
    for (const Corpus* part : {&split.train, &split.val, &split.test}) {
        std::map<int, int> counts;
        for (const auto& e : part->examples) counts[e.label]++;
        int lo = 1 << 30, hi = 0;
        for (auto& [cls, n] : counts) {
            lo = std::min(lo, n);
            hi = std::max(hi, n);
        }
        EXPECT_LE(hi - lo, 1);
    }
}

TEST(SplitTest, DeterministicPartition) {
    CorpusSpec spec;
    spec.num_classes = 4;
    spec.examples_per_class = 10;
    Corpus c = generate_corpus(spec, 2);
    SplitSpec ss;
    ss.seed = 11;
    CorpusSplit a = split_corpus(c, ss);
    CorpusSplit b = split_corpus(c, ss);
    auto ids = [](const Corpus& part) {
        std::vector<std::string> v;
        for (const auto& e : part.examples) v.push_back(e.id);
        return v;
    };
    EXPECT_EQ(ids(a.train), ids(b.train));
    EXPECT_EQ(ids(a.val), ids(b.val));
    EXPECT_EQ(ids(a.test), ids(b.test));
}

TEST(SplitTest, AllTrainRequiresAllowEmpty) {
    CorpusSpec spec;
    spec.num_classes = 2;
    spec.examples_per_class = 6;
    Corpus c = generate_corpus(spec, 2);
    SplitSpec ss;
    ss.train = 1;
    ss.val = 0;
    ss.test = 0;
    EXPECT_THROW(split_corpus(c, ss), SplitError);
    ss.allow_empty = true;
    CorpusSplit split = split_corpus(c, ss);
    EXPECT_EQ(split.train.examples.size(), 12u);
    EXPECT_TRUE(split.val.examples.empty());
    EXPECT_TRUE(split.test.examples.empty());
}

TEST(SplitTest, SmallClassErrorNamesClass) {
    fs::path dir = temp_dir("small-class");
    write_file(dir / "a.c", "int f() { return 1; }");
    std::ostringstream manifest;
    for (int i = 0; i < 6; ++i)
        manifest << R"({"id":"big)" << i << R"(","path":"a.c","label":"big"})" << "\n";
    manifest << R"({"id":"tiny0","path":"a.c","label":"tiny"})" << "\n";
    write_file(dir / "manifest.jsonl", manifest.str());
    Corpus c = ingest_corpus(dir / "manifest.jsonl").corpus;
    SplitSpec ss;
    try {
        split_corpus(c, ss);
        FAIL() << "expected SplitError";
    } catch (const SplitError& e) {
        EXPECT_NE(std::string(e.what()).find("tiny"), std::string::npos);
    }
}

TEST(ManifestRoundTripTest, WriteThenIngest) {
    CorpusSpec spec;
    spec.num_classes = 3;
    spec.examples_per_class = 4;
    Corpus c = generate_corpus(spec, 9);
    fs::path dir = temp_dir("roundtrip");
    write_corpus(c, dir);
    IngestResult r = ingest_corpus(dir / "manifest.jsonl");
    ASSERT_EQ(r.corpus.examples.size(), c.examples.size());
    for (std::size_t i = 0; i < c.examples.size(); ++i) {
        EXPECT_EQ(r.corpus.examples[i].id, c.examples[i].id);
        EXPECT_EQ(r.corpus.examples[i].source, c.examples[i].source);
        EXPECT_EQ(r.corpus.examples[i].label, c.examples[i].label);
    }
}
