#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "robin/errors.hpp"
#include "robin/example.hpp"
#include "robin/lexer.hpp"
#include "robin/rng.hpp"
#include "robin/transforms.hpp"

namespace robin {

struct CorpusSpec {
    int num_classes = 10;
    int examples_per_class = 50;
    std::uint64_t surface_variation_seed = 0;
    std::vector<std::string> templates;  // empty = all built-ins, in order
};

struct SplitSpec {
    int train = 3;
    int val = 1;
    int test = 1;
    std::uint64_t seed = 0;
    bool allow_empty = false;
};

// ---------------------------------------------------------------------------
// Synthetic templates
// ---------------------------------------------------------------------------
//
// Each template renders one mini-C function whose surface form varies with
// the style knobs below. The variation axes deliberately mirror the
// transformation catalog, so every generated example exposes plenty of
// rewritable attribute sites.

namespace gen {

struct Style {
    bool use_for = true;
    bool hex_lits = false;
    bool merged_decls = false;
    bool braced_if = true;
    int incr_style = 0;         // 0: x++, 1: x += 1, 2: x = x + 1
    bool accum_compound = true; // x += e vs x = x + e
};

inline std::string lit(int v, const Style& st) {
    if (st.hex_lits && v >= 2) return detail::to_hex_literal(static_cast<unsigned long long>(v));
    return std::to_string(v);
}

inline std::string incr(const std::string& var, const Style& st, bool down = false) {
    const char* op = down ? "-" : "+";
    switch (st.incr_style) {
        case 1: return var + " " + op + "= 1";
        case 2: return var + " = " + var + " " + op + " 1";
        default: return var + (down ? "--" : "++");
    }
}

inline std::string accum(const std::string& var, char op, const std::string& rhs,
                         const Style& st) {
    if (st.accum_compound) return var + " " + op + "= " + rhs;
    return var + " = " + var + " " + op + " " + rhs;
}

inline void emit_decls(std::ostringstream& out, const std::vector<std::string>& names,
                       const Style& st, const std::string& indent) {
    if (st.merged_decls && names.size() > 1) {
        out << indent << "int ";
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out << ", ";
            out << names[i];
        }
        out << ";\n";
    } else {
        for (const auto& n : names) out << indent << "int " << n << ";\n";
    }
}

inline void emit_if(std::ostringstream& out, const std::string& cond,
                    const std::string& stmt, const Style& st,
                    const std::string& indent) {
    if (st.braced_if) {
        out << indent << "if (" << cond << ") {\n"
            << indent << "    " << stmt << "\n"
            << indent << "}\n";
    } else {
        out << indent << "if (" << cond << ") " << stmt << "\n";
    }
}

inline void emit_loop(std::ostringstream& out, const std::string& var,
                      const std::string& init_value, const std::string& cond,
                      const std::vector<std::string>& body, const Style& st,
                      const std::string& indent, bool step_down = false) {
    if (st.use_for) {
        out << indent << "for (" << var << " = " << init_value << "; " << cond << "; "
            << incr(var, st, step_down) << ") {\n";
        for (const auto& line : body) out << indent << "    " << line << "\n";
        out << indent << "}\n";
    } else {
        out << indent << var << " = " << init_value << ";\n";
        out << indent << "while (" << cond << ") {\n";
        for (const auto& line : body) out << indent << "    " << line << "\n";
        out << indent << "    " << incr(var, st, step_down) << ";\n";
        out << indent << "}\n";
    }
}

struct TemplateDef {
    std::string name;
    std::vector<std::string> fn_names;
    int locals_needed;
    std::string (*render)(const std::string& fn, const std::vector<std::string>& v,
                          const Style& st);
};

inline std::string render_sum(const std::string& fn, const std::vector<std::string>& v,
                              const Style& st) {
    const std::string &arr = v[0], &n = v[1], &acc = v[2], &i = v[3];
    std::ostringstream out;
    out << "int " << fn << "(int " << arr << "[], int " << n << ") {\n";
    emit_decls(out, {acc, i}, st, "    ");
    out << "    " << acc << " = " << lit(0, st) << ";\n";
    emit_loop(out, i, lit(0, st), i + " < " + n,
              {accum(acc, '+', arr + "[" + i + "]", st) + ";"}, st, "    ");
    out << "    return " << acc << ";\n}\n";
    return out.str();
}

inline std::string render_max(const std::string& fn, const std::vector<std::string>& v,
                              const Style& st) {
    const std::string &arr = v[0], &n = v[1], &best = v[2], &i = v[3], &cur = v[4];
    std::ostringstream out;
    out << "int " << fn << "(int " << arr << "[], int " << n << ") {\n";
    emit_decls(out, {best, i, cur}, st, "    ");
    out << "    " << best << " = " << arr << "[" << lit(0, st) << "];\n";
    std::vector<std::string> body = {cur + " = " + arr + "[" + i + "];"};
    std::ostringstream cmp;
    emit_if(cmp, cur + " > " + best, best + " = " + cur + ";", st, "");
    {
        std::istringstream lines(cmp.str());
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) body.push_back(line);
    }
    emit_loop(out, i, lit(1, st), i + " < " + n, body, st, "    ");
    out << "    return " << best << ";\n}\n";
    return out.str();
}

inline std::string render_min(const std::string& fn, const std::vector<std::string>& v,
                              const Style& st) {
    const std::string &arr = v[0], &n = v[1], &best = v[2], &i = v[3], &cur = v[4];
    std::ostringstream out;
    out << "int " << fn << "(int " << arr << "[], int " << n << ") {\n";
    emit_decls(out, {best, i, cur}, st, "    ");
    out << "    " << best << " = " << arr << "[" << lit(0, st) << "];\n";
    std::vector<std::string> body = {cur + " = " + arr + "[" + i + "];"};
    std::ostringstream cmp;
    emit_if(cmp, cur + " < " + best, best + " = " + cur + ";", st, "");
    {
        std::istringstream lines(cmp.str());
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) body.push_back(line);
    }
    emit_loop(out, i, lit(1, st), i + " < " + n, body, st, "    ");
    out << "    return " << best << ";\n}\n";
    return out.str();
}

inline std::string render_factorial(const std::string& fn,
                                    const std::vector<std::string>& v, const Style& st) {
    const std::string &n = v[0], &res = v[1], &i = v[2];
    std::ostringstream out;
    out << "int " << fn << "(int " << n << ") {\n";
    emit_decls(out, {res, i}, st, "    ");
    out << "    " << res << " = " << lit(1, st) << ";\n";
    emit_loop(out, i, lit(1, st), i + " <= " + n, {accum(res, '*', i, st) + ";"}, st,
              "    ");
    out << "    return " << res << ";\n}\n";
    return out.str();
}

inline std::string render_str_equal(const std::string& fn,
                                    const std::vector<std::string>& v, const Style& st) {
    const std::string &s = v[0], &t = v[1], &i = v[2], &ok = v[3];
    std::ostringstream out;
    out << "int " << fn << "(char " << s << "[], char " << t << "[]) {\n";
    emit_decls(out, {i, ok}, st, "    ");
    out << "    " << ok << " = " << lit(1, st) << ";\n";
    std::vector<std::string> body;
    {
        std::ostringstream cmp;
        emit_if(cmp, s + "[" + i + "] != " + t + "[" + i + "]",
                ok + " = " + lit(0, st) + ";", st, "");
        std::istringstream lines(cmp.str());
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) body.push_back(line);
    }
    emit_loop(out, i, lit(0, st), s + "[" + i + "] != '\\0'", body, st, "    ");
    emit_if(out, t + "[" + i + "] != '\\0'", ok + " = " + lit(0, st) + ";", st, "    ");
    out << "    return " << ok << ";\n}\n";
    return out.str();
}

inline std::string render_count_factors(const std::string& fn,
                                        const std::vector<std::string>& v,
                                        const Style& st) {
    const std::string &n = v[0], &cnt = v[1], &d = v[2];
    std::ostringstream out;
    out << "int " << fn << "(int " << n << ") {\n";
    emit_decls(out, {cnt, d}, st, "    ");
    out << "    " << cnt << " = " << lit(0, st) << ";\n";
    std::vector<std::string> body;
    {
        std::ostringstream cmp;
        emit_if(cmp, n + " % " + d + " == " + lit(0, st), incr(cnt, st) + ";", st, "");
        std::istringstream lines(cmp.str());
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) body.push_back(line);
    }
    emit_loop(out, d, lit(1, st), d + " <= " + n, body, st, "    ");
    out << "    return " << cnt << ";\n}\n";
    return out.str();
}

inline std::string render_reverse(const std::string& fn,
                                  const std::vector<std::string>& v, const Style& st) {
    const std::string &arr = v[0], &n = v[1], &lo = v[2], &hi = v[3], &tmp = v[4];
    std::ostringstream out;
    out << "void " << fn << "(int " << arr << "[], int " << n << ") {\n";
    emit_decls(out, {lo, hi, tmp}, st, "    ");
    out << "    " << lo << " = " << lit(0, st) << ";\n";
    out << "    " << hi << " = " << n << " - " << lit(1, st) << ";\n";
    out << "    while (" << lo << " < " << hi << ") {\n";
    out << "        " << tmp << " = " << arr << "[" << lo << "];\n";
    out << "        " << arr << "[" << lo << "] = " << arr << "[" << hi << "];\n";
    out << "        " << arr << "[" << hi << "] = " << tmp << ";\n";
    out << "        " << incr(lo, st) << ";\n";
    out << "        " << incr(hi, st, true) << ";\n";
    out << "    }\n}\n";
    return out.str();
}

inline std::string render_gcd(const std::string& fn, const std::vector<std::string>& v,
                              const Style& st) {
    const std::string &a = v[0], &b = v[1], &r = v[2];
    std::ostringstream out;
    out << "int " << fn << "(int " << a << ", int " << b << ") {\n";
    emit_decls(out, {r}, st, "    ");
    out << "    " << r << " = " << lit(0, st) << ";\n";
    out << "    while (" << b << " > " << lit(0, st) << ") {\n";
    out << "        " << r << " = " << a << " % " << b << ";\n";
    out << "        " << a << " = " << b << ";\n";
    out << "        " << b << " = " << r << ";\n";
    out << "    }\n";
    emit_if(out, a + " < " + lit(0, st), a + " = " + lit(0, st) + " - " + a + ";", st,
            "    ");
    out << "    return " << a << ";\n}\n";
    return out.str();
}

inline std::string render_is_prime(const std::string& fn,
                                   const std::vector<std::string>& v, const Style& st) {
    const std::string &n = v[0], &flag = v[1], &d = v[2], &h = v[3];
    std::ostringstream out;
    out << "int " << fn << "(int " << n << ") {\n";
    emit_decls(out, {flag, d, h}, st, "    ");
    out << "    " << flag << " = " << lit(1, st) << ";\n";
    emit_if(out, n + " < " + lit(2, st), flag + " = " + lit(0, st) + ";", st, "    ");
    out << "    " << h << " = " << n << " / " << lit(2, st) << ";\n";
    std::vector<std::string> body;
    {
        std::ostringstream cmp;
        emit_if(cmp, n + " % " + d + " == " + lit(0, st), flag + " = " + lit(0, st) + ";",
                st, "");
        std::istringstream lines(cmp.str());
        std::string line;
        while (std::getline(lines, line))
            if (!line.empty()) body.push_back(line);
    }
    emit_loop(out, d, lit(2, st), d + " <= " + h, body, st, "    ");
    out << "    return " << flag << ";\n}\n";
    return out.str();
}

inline std::string render_average(const std::string& fn,
                                  const std::vector<std::string>& v, const Style& st) {
    const std::string &arr = v[0], &n = v[1], &acc = v[2], &i = v[3];
    std::ostringstream out;
    out << "int " << fn << "(int " << arr << "[], int " << n << ") {\n";
    emit_decls(out, {acc, i}, st, "    ");
    out << "    " << acc << " = " << lit(0, st) << ";\n";
    emit_loop(out, i, lit(0, st), i + " < " + n,
              {accum(acc, '+', arr + "[" + i + "]", st) + ";"}, st, "    ");
    out << "    return " << acc << " / " << n << ";\n}\n";
    return out.str();
}

inline std::string render_fibonacci(const std::string& fn,
                                    const std::vector<std::string>& v, const Style& st) {
    const std::string &n = v[0], &a = v[1], &b = v[2], &t = v[3], &i = v[4];
    std::ostringstream out;
    out << "int " << fn << "(int " << n << ") {\n";
    emit_decls(out, {a, b, t, i}, st, "    ");
    out << "    " << a << " = " << lit(0, st) << ";\n";
    out << "    " << b << " = " << lit(1, st) << ";\n";
    emit_loop(out, i, lit(0, st), i + " < " + n,
              {t + " = " + a + " + " + b + ";", a + " = " + b + ";", b + " = " + t + ";"},
              st, "    ");
    out << "    return " << a << ";\n}\n";
    return out.str();
}

inline std::string render_power(const std::string& fn, const std::vector<std::string>& v,
                                const Style& st) {
    const std::string &base = v[0], &e = v[1], &res = v[2], &i = v[3];
    std::ostringstream out;
    out << "int " << fn << "(int " << base << ", int " << e << ") {\n";
    emit_decls(out, {res, i}, st, "    ");
    out << "    " << res << " = " << lit(1, st) << ";\n";
    emit_loop(out, i, lit(0, st), i + " < " + e, {accum(res, '*', base, st) + ";"}, st,
              "    ");
    out << "    return " << res << ";\n}\n";
    return out.str();
}

inline const std::vector<TemplateDef>& builtin_templates() {
    static const std::vector<TemplateDef> defs = {
        {"sum-array", {"sum_array", "array_sum", "add_all", "total_of"}, 4, render_sum},
        {"max-array", {"max_array", "array_max", "find_max", "largest_of"}, 5, render_max},
        {"factorial", {"factorial", "fact_of", "product_up_to", "fact_value"}, 3,
         render_factorial},
        {"string-compare", {"str_equal", "same_string", "str_eq", "equal_strings"}, 4,
         render_str_equal},
        {"count-factors", {"count_factors", "num_divisors", "divisor_count", "factors_of"},
         3, render_count_factors},
        {"reverse-array", {"reverse_array", "array_reverse", "flip_array", "mirror_array"},
         5, render_reverse},
        {"gcd", {"gcd_value", "greatest_common_divisor", "gcd_of", "common_divisor"}, 3,
         render_gcd},
        {"is-prime", {"is_prime", "prime_check", "check_prime", "primality"}, 4,
         render_is_prime},
        {"min-array", {"min_array", "array_min", "find_min", "smallest_of"}, 5,
         render_min},
        {"array-average", {"array_average", "mean_of", "avg_array", "average_of"}, 4,
         render_average},
        {"fibonacci", {"fibonacci", "fib_value", "fib_of", "nth_fib"}, 5,
         render_fibonacci},
        {"power", {"int_power", "int_pow", "pow_of", "raise_to"}, 4, render_power},
    };
    return defs;
}

inline const std::vector<std::string>& local_name_pool() {
    static const std::vector<std::string> pool = {
        "i",   "j",   "k",   "n",     "m",     "t",     "a",    "b",
        "c",   "x",   "y",   "z",     "idx",   "pos",   "len",  "cnt",
        "num", "acc", "total", "result", "val", "tmp",  "lo",   "hi",
        "best", "cur", "left", "right", "count", "limit", "step", "base0"};
    return pool;
}

}  // namespace gen

inline std::vector<std::string> builtin_template_names() {
    std::vector<std::string> out;
    for (const auto& t : gen::builtin_templates()) out.push_back(t.name);
    return out;
}

inline Corpus generate_corpus(const CorpusSpec& spec, std::uint64_t seed) {
    const auto& all = gen::builtin_templates();
    std::vector<const gen::TemplateDef*> chosen;
    if (spec.templates.empty()) {
        for (const auto& t : all) chosen.push_back(&t);
    } else {
        for (const auto& name : spec.templates) {
            const gen::TemplateDef* found = nullptr;
            for (const auto& t : all)
                if (t.name == name) found = &t;
            if (!found)
                throw ConfigError("templates: unknown template '" + name + "'");
            chosen.push_back(found);
        }
    }
    if (spec.num_classes < 1)
        throw ConfigError("num_classes: must be positive, got " +
                          std::to_string(spec.num_classes));
    if (spec.num_classes > static_cast<int>(chosen.size()))
        throw ConfigError("num_classes: " + std::to_string(spec.num_classes) +
                          " exceeds the " + std::to_string(chosen.size()) +
                          " available templates");
    if (spec.examples_per_class < 2)
        throw ConfigError("examples_per_class: must be >= 2, got " +
                          std::to_string(spec.examples_per_class));

    const std::uint64_t base = splitmix64(seed ^ spec.surface_variation_seed);
    Corpus corpus;
    corpus.num_classes = spec.num_classes;
    std::set<std::string> seen_sources;

    for (int c = 0; c < spec.num_classes; ++c) {
        const gen::TemplateDef& tpl = *chosen[c];
        corpus.label_names.push_back(tpl.name);
        for (int e = 0; e < spec.examples_per_class; ++e) {
            Rng rng(derive_seed(base, tpl.name, static_cast<std::uint64_t>(e)));
            std::string source;
            for (int attempt = 0; attempt < 32; ++attempt) {
                gen::Style st;
                st.use_for = rng.next_index(2) == 0;
                st.hex_lits = rng.next_index(4) == 0;
                st.merged_decls = rng.next_index(2) == 0;
                st.braced_if = rng.next_index(2) == 0;
                st.incr_style = static_cast<int>(rng.next_index(3));
                st.accum_compound = rng.next_index(2) == 0;

                const std::string fn = tpl.fn_names[rng.next_index(tpl.fn_names.size())];
                const auto& pool = gen::local_name_pool();
                auto picks = rng.sample_without_replacement(pool.size(),
                                                            tpl.locals_needed);
                std::vector<std::string> names;
                for (auto p : picks) names.push_back(pool[p]);

                source = tpl.render(fn, names, st);
                if (!seen_sources.count(source)) break;
            }
            seen_sources.insert(source);

            CodeExample ex;
            char idbuf[64];
            std::snprintf(idbuf, sizeof(idbuf), "%s-%03d", tpl.name.c_str(), e);
            ex.id = idbuf;
            ex.source = source;
            ex.label = c;
            ex.origin = ExampleOrigin::Synthetic;
            corpus.examples.push_back(std::move(ex));
        }
    }
    return corpus;
}

// ---------------------------------------------------------------------------
// Manifest IO
// ---------------------------------------------------------------------------

inline nlohmann::json record_to_json(const TransformationRecord& r) {
    return nlohmann::json{{"kind", transform_kind_name(r.kind)},
                          {"site", {r.site_begin, r.site_end}},
                          {"old", r.old_value},
                          {"new", r.new_value}};
}

inline TransformationRecord record_from_json(const nlohmann::json& j) {
    TransformationRecord r;
    auto kind = transform_kind_from_name(j.at("kind").get<std::string>());
    if (!kind) throw IngestError("unknown transformation kind in manifest");
    r.kind = *kind;
    r.site_begin = j.at("site").at(0).get<std::size_t>();
    r.site_end = j.at("site").at(1).get<std::size_t>();
    r.old_value = j.at("old").get<std::string>();
    r.new_value = j.at("new").get<std::string>();
    return r;
}

// Writes `<id>.c` files plus `manifest.jsonl` into `dir`. Perturbed examples
// carry their provenance (`origin`) and replayable transformation records.
inline void write_corpus(
    const Corpus& corpus, const std::filesystem::path& dir,
    const std::map<std::string, std::vector<TransformationRecord>>& records = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream manifest(dir / "manifest.jsonl");
    if (!manifest) throw IngestError("cannot write manifest in " + dir.string());
    for (const auto& ex : corpus.examples) {
        const std::string fname = ex.id + ".c";
        std::ofstream f(dir / fname, std::ios::binary);
        f << ex.source;
        nlohmann::json row{{"id", ex.id},
                           {"path", fname},
                           {"label", corpus.label_names.at(ex.label)}};
        if (ex.origin == ExampleOrigin::Perturbed) {
            row["origin"] = ex.origin_id;
            auto it = records.find(ex.id);
            if (it != records.end()) {
                nlohmann::json rj = nlohmann::json::array();
                for (const auto& r : it->second) rj.push_back(record_to_json(r));
                row["records"] = rj;
            }
        }
        manifest << row.dump() << "\n";
    }
}

struct IngestResult {
    Corpus corpus;
    std::vector<std::string> warnings;
    std::map<std::string, std::vector<TransformationRecord>> records;
};

// Reads a JSON-Lines manifest; one CodeExample per row. Label strings map to
// dense indices in first-seen order unless `fixed_labels` pins the mapping.
inline IngestResult ingest_corpus(const std::filesystem::path& manifest_path,
                                  const std::vector<std::string>* fixed_labels = nullptr) {
    namespace fs = std::filesystem;
    std::ifstream in(manifest_path);
    if (!in) throw IngestError("manifest not found: " + manifest_path.string());
    const fs::path base = manifest_path.parent_path();

    IngestResult result;
    Corpus& corpus = result.corpus;
    if (fixed_labels) corpus.label_names = *fixed_labels;
    std::map<std::string, int> label_index;
    for (std::size_t i = 0; i < corpus.label_names.size(); ++i)
        label_index[corpus.label_names[i]] = static_cast<int>(i);

    std::set<std::string> ids;
    std::vector<std::string> errors;
    std::string line;
    int row_no = 0;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            errors.push_back("row " + std::to_string(row_no) + ": bad JSON: " + e.what());
            continue;
        }
        if (!row.contains("id") || !row.contains("path") || !row.contains("label")) {
            errors.push_back("row " + std::to_string(row_no) +
                             ": missing id/path/label");
            continue;
        }
        const std::string id = row["id"].get<std::string>();
        if (!ids.insert(id).second) {
            errors.push_back("row " + std::to_string(row_no) + ": duplicate id '" + id +
                             "'");
            continue;
        }
        const fs::path p = base / row["path"].get<std::string>();
        std::ifstream src(p, std::ios::binary);
        if (!src) {
            errors.push_back("row " + std::to_string(row_no) + ": missing file " +
                             p.string());
            continue;
        }
        std::ostringstream buf;
        buf << src.rdbuf();
        std::string source = buf.str();
        if (source.empty()) {
            errors.push_back("row " + std::to_string(row_no) + ": empty source " +
                             p.string());
            continue;
        }
        try {
            tokenize(source);
        } catch (const LexError& e) {
            result.warnings.push_back("row " + std::to_string(row_no) + " ('" + id +
                                      "') rejected: " + e.what());
            continue;
        }

        const std::string label_str = row["label"].get<std::string>();
        auto it = label_index.find(label_str);
        int label;
        if (it == label_index.end()) {
            if (fixed_labels) {
                errors.push_back("row " + std::to_string(row_no) + ": unknown label '" +
                                 label_str + "'");
                continue;
            }
            label = static_cast<int>(corpus.label_names.size());
            corpus.label_names.push_back(label_str);
            label_index[label_str] = label;
        } else {
            label = it->second;
        }

        CodeExample ex;
        ex.id = id;
        ex.source = std::move(source);
        ex.label = label;
        if (row.contains("origin")) {
            ex.origin = ExampleOrigin::Perturbed;
            ex.origin_id = row["origin"].get<std::string>();
            if (row.contains("records")) {
                std::vector<TransformationRecord> recs;
                for (const auto& rj : row["records"]) recs.push_back(record_from_json(rj));
                result.records[id] = std::move(recs);
            }
        } else {
            ex.origin = ExampleOrigin::Ingested;
        }
        corpus.examples.push_back(std::move(ex));
    }

    if (!errors.empty()) {
        std::string msg = "ingestion failed:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw IngestError(msg);
    }
    if (corpus.examples.empty()) throw IngestError("no examples in manifest");
    corpus.num_classes = static_cast<int>(corpus.label_names.size());
    return result;
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

struct CorpusSplit {
    Corpus train, val, test;
};

// Stratified split: per class, examples are ordered by id, shuffled with a
// class-local seed, and allocated by largest remainder. A pure function of
// (corpus ids, ratios, seed).
inline CorpusSplit split_corpus(const Corpus& corpus, const SplitSpec& spec) {
    if (spec.train < 0 || spec.val < 0 || spec.test < 0 ||
        spec.train + spec.val + spec.test <= 0)
        throw ConfigError("split ratios must be non-negative with positive sum");

    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < corpus.examples.size(); ++i)
        by_class[corpus.examples[i].label].push_back(i);

    for (int c = 0; c < corpus.num_classes; ++c) {
        auto it = by_class.find(c);
        std::size_t cnt = it == by_class.end() ? 0 : it->second.size();
        if (cnt < 5)
            throw SplitError("class '" + corpus.label_names.at(c) + "' has only " +
                             std::to_string(cnt) + " examples; need at least 5");
    }

    const int ratios[3] = {spec.train, spec.val, spec.test};
    const char* names[3] = {"train", "val", "test"};
    for (int s = 0; s < 3; ++s) {
        if (ratios[s] == 0 && !spec.allow_empty)
            throw SplitError(std::string("ratio for '") + names[s] +
                             "' is zero; set allow_empty to permit empty splits");
    }

    CorpusSplit out;
    for (Corpus* c : {&out.train, &out.val, &out.test}) {
        c->num_classes = corpus.num_classes;
        c->label_names = corpus.label_names;
    }

    const int total = spec.train + spec.val + spec.test;
    for (auto& [cls, members] : by_class) {
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) {
                      return corpus.examples[a].id < corpus.examples[b].id;
                  });
        Rng rng(derive_seed(spec.seed, "split", static_cast<std::uint64_t>(cls)));
        rng.shuffle(members);

        const std::size_t s = members.size();
        std::size_t counts[3];
        double frac[3];
        std::size_t assigned = 0;
        for (int j = 0; j < 3; ++j) {
            double exact = static_cast<double>(s) * ratios[j] / total;
            counts[j] = static_cast<std::size_t>(exact);
            frac[j] = exact - static_cast<double>(counts[j]);
            assigned += counts[j];
        }
        std::size_t rem = s - assigned;
        std::vector<int> order = {0, 1, 2};
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return frac[a] > frac[b]; });
        for (std::size_t r = 0; r < rem; ++r) counts[order[r % 3]] += 1;

        for (int j = 0; j < 3; ++j) {
            if (ratios[j] > 0 && counts[j] == 0)
                throw SplitError("class '" + corpus.label_names.at(cls) +
                                 "' too small to populate the '" + names[j] +
                                 "' split");
        }

        std::size_t pos = 0;
        Corpus* dests[3] = {&out.train, &out.val, &out.test};
        for (int j = 0; j < 3; ++j) {
            for (std::size_t r = 0; r < counts[j]; ++r, ++pos)
                dests[j]->examples.push_back(corpus.examples[members[pos]]);
        }
    }
    return out;
}

}  // namespace robin
