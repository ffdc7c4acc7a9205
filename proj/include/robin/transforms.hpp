#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "robin/errors.hpp"
#include "robin/example.hpp"
#include "robin/lexer.hpp"
#include "robin/rng.hpp"

namespace robin {

// Seven coding-style attribute kinds, all expressible on the token stream.
enum class TransformKind {
    IdentifierRename,   // T1: local/param rename from a reserved pool
    LoopStyle,          // T2: for <-> while
    AssignStyle,        // T3: i++ <-> i+=1 <-> i=i+1, x op= e <-> x = x op e
    BraceStyle,         // T4: single-statement body braces on/off
    DeclGroup,          // T5: int a, b; <-> int a; int b;
    RelationSwap,       // T6: a < b <-> b > a
    LiteralBase,        // T7: decimal <-> hexadecimal
};

inline const char* transform_kind_name(TransformKind k) {
    switch (k) {
        case TransformKind::IdentifierRename: return "ident-rename";
        case TransformKind::LoopStyle: return "loop-style";
        case TransformKind::AssignStyle: return "assign-style";
        case TransformKind::BraceStyle: return "brace-style";
        case TransformKind::DeclGroup: return "decl-group";
        case TransformKind::RelationSwap: return "relop-swap";
        case TransformKind::LiteralBase: return "literal-base";
    }
    return "?";
}

inline std::optional<TransformKind> transform_kind_from_name(const std::string& s) {
    for (TransformKind k :
         {TransformKind::IdentifierRename, TransformKind::LoopStyle,
          TransformKind::AssignStyle, TransformKind::BraceStyle,
          TransformKind::DeclGroup, TransformKind::RelationSwap,
          TransformKind::LiteralBase}) {
        if (s == transform_kind_name(k)) return k;
    }
    return std::nullopt;
}

// One rewritable site. `site` is a [start, end) token-index range into the
// full stream (whitespace tokens included). Rename instances anchor at the
// identifier's first occurrence and act globally.
struct AttributeInstance {
    TransformKind kind;
    std::size_t site_begin = 0;
    std::size_t site_end = 0;
    std::string current_value;
    std::vector<std::string> alternatives;
};

struct TransformationRecord {
    TransformKind kind;
    std::size_t site_begin = 0;
    std::size_t site_end = 0;
    std::string old_value;
    std::string new_value;
};

namespace detail {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

inline std::size_t next_nz(const TokenStream& s, std::size_t i) {
    for (std::size_t j = i + 1; j < s.tokens.size(); ++j)
        if (!s.tokens[j].is_ws_or_comment()) return j;
    return npos;
}

inline std::size_t prev_nz(const TokenStream& s, std::size_t i) {
    for (std::size_t j = i; j-- > 0;)
        if (!s.tokens[j].is_ws_or_comment()) return j;
    return npos;
}

inline bool text_is(const TokenStream& s, std::size_t i, std::string_view t) {
    return i != npos && i < s.tokens.size() && s.tokens[i].text == t;
}

inline bool is_type_keyword(const Token& t) {
    if (t.kind != TokenKind::Keyword) return false;
    static const std::set<std::string> types = {"char", "short", "int",  "long",
                                                "float", "double", "signed",
                                                "unsigned", "const", "static",
                                                "void"};
    return types.count(t.text) > 0;
}

inline bool is_base_type_keyword(const Token& t) {
    if (t.kind != TokenKind::Keyword) return false;
    static const std::set<std::string> types = {"char", "short", "int",   "long",
                                                "float", "double", "signed",
                                                "unsigned"};
    return types.count(t.text) > 0;
}

// Trim whitespace/comment tokens off both ends of [a, b).
inline std::pair<std::size_t, std::size_t> trim_range(const TokenStream& s,
                                                      std::size_t a, std::size_t b) {
    while (a < b && s.tokens[a].is_ws_or_comment()) ++a;
    while (b > a && s.tokens[b - 1].is_ws_or_comment()) --b;
    return {a, b};
}

struct LoopShape {
    bool is_for = false;
    std::size_t kw = 0;
    std::size_t open = 0, close = 0;
    std::size_t init_a = 0, init_b = 0;
    std::size_t cond_a = 0, cond_b = 0;
    std::size_t step_a = 0, step_b = 0;
    std::size_t body_a = 0, body_b = 0;  // includes braces when braced
    bool braced = false;
    bool has_continue = false;
    std::size_t site_end() const { return body_b; }
};

// Parses the loop starting at keyword index `kw`; nullopt when the shape is
// outside the rewritable subset (missing header parts, empty while body,
// unterminated body statement).
inline std::optional<LoopShape> parse_loop(const TokenStream& s, std::size_t kw) {
    LoopShape L;
    L.kw = kw;
    L.is_for = s.tokens[kw].text == "for";
    std::size_t open = next_nz(s, kw);
    if (open == npos || !text_is(s, open, "(")) return std::nullopt;
    if (s.match[open] < 0) return std::nullopt;
    L.open = open;
    L.close = static_cast<std::size_t>(s.match[open]);

    if (L.is_for) {
        std::vector<std::size_t> semis;
        int depth = 0;
        for (std::size_t i = open + 1; i < L.close; ++i) {
            const std::string& t = s.tokens[i].text;
            if (t == "(") ++depth;
            else if (t == ")") --depth;
            else if (t == ";" && depth == 0) semis.push_back(i);
        }
        if (semis.size() != 2) return std::nullopt;
        std::tie(L.init_a, L.init_b) = trim_range(s, open + 1, semis[0]);
        std::tie(L.cond_a, L.cond_b) = trim_range(s, semis[0] + 1, semis[1]);
        std::tie(L.step_a, L.step_b) = trim_range(s, semis[1] + 1, L.close);
        if (L.init_a == L.init_b || L.cond_a == L.cond_b || L.step_a == L.step_b)
            return std::nullopt;
    } else {
        std::tie(L.cond_a, L.cond_b) = trim_range(s, open + 1, L.close);
        if (L.cond_a == L.cond_b) return std::nullopt;
    }

    std::size_t body = next_nz(s, L.close);
    if (body == npos) return std::nullopt;
    if (text_is(s, body, "{")) {
        if (s.match[body] < 0) return std::nullopt;
        L.braced = true;
        L.body_a = body;
        L.body_b = static_cast<std::size_t>(s.match[body]) + 1;
    } else {
        // Empty-body while is indistinguishable from a do-while tail here.
        if (!L.is_for && text_is(s, body, ";")) return std::nullopt;
        L.braced = false;
        L.body_a = body;
        int pd = 0, bd = 0;
        std::size_t end = npos;
        for (std::size_t i = body; i < s.tokens.size(); ++i) {
            const std::string& t = s.tokens[i].text;
            if (t == "(") ++pd;
            else if (t == ")") --pd;
            else if (t == "{") ++bd;
            else if (t == "}") --bd;
            else if (t == ";" && pd == 0 && bd == 0) {
                end = i;
                break;
            }
        }
        if (end == npos || bd != 0) return std::nullopt;
        L.body_b = end + 1;
    }
    for (std::size_t i = L.body_a; i < L.body_b; ++i)
        if (s.tokens[i].kind == TokenKind::Keyword && s.tokens[i].text == "continue")
            L.has_continue = true;
    return L;
}

struct Declaration {
    std::size_t type_a = 0, type_b = 0;  // type keyword run [a, b)
    std::string type_text;               // canonical, space-joined
    std::vector<std::pair<std::size_t, std::size_t>> declarators;  // trimmed ranges
    std::vector<std::string> names;
    std::size_t semi = npos;  // terminating ';' (npos for param decls)
    std::size_t end = 0;      // one past last token of the declaration
    int brace_depth = 0;
};

// Scans a declaration starting at token i (a type keyword). Splits the
// declarator list at top-level commas only, so initializers containing calls
// survive intact.
inline std::optional<Declaration> parse_declaration(const TokenStream& s,
                                                    std::size_t i,
                                                    int brace_depth) {
    Declaration d;
    d.brace_depth = brace_depth;
    d.type_a = i;
    std::size_t j = i;
    while (j < s.tokens.size() &&
           (s.tokens[j].is_ws_or_comment() || is_type_keyword(s.tokens[j]))) {
        if (is_type_keyword(s.tokens[j])) {
            if (!d.type_text.empty()) d.type_text += ' ';
            d.type_text += s.tokens[j].text;
            d.type_b = j + 1;
        }
        ++j;
    }
    bool has_base = false;
    for (std::size_t t = d.type_a; t < d.type_b; ++t)
        if (!s.tokens[t].is_ws_or_comment() && is_base_type_keyword(s.tokens[t]))
            has_base = true;
    if (!has_base) return std::nullopt;

    std::size_t decl_a = d.type_b;
    int pd = 0, kd = 0;
    std::size_t k = d.type_b;
    bool expect_name = true;
    for (; k < s.tokens.size(); ++k) {
        const Token& t = s.tokens[k];
        if (t.is_ws_or_comment()) continue;
        if (expect_name) {
            if (t.kind == TokenKind::Operator && t.text == "*") continue;  // pointers pass through
            if (is_type_keyword(t) && !d.names.empty()) {
                // Parameter list: the comma separated whole declarations, not
                // declarators, and the completed one is already recorded.
                d.end = decl_a - 1;
                return d;
            }
            if (t.kind != TokenKind::Identifier) return std::nullopt;
            d.names.push_back(t.text);
            expect_name = false;
            continue;
        }
        if (t.text == "(" && pd == 0 && kd == 0 && d.names.size() == 1 &&
            d.declarators.empty()) {
            // Function declarator: `type name (` — not a variable declaration.
            return std::nullopt;
        }
        if (t.text == "(") ++pd;
        else if (t.text == ")") {
            if (pd == 0) {
                // Parameter declaration ends at the closing paren.
                auto [a, b] = trim_range(s, decl_a, k);
                if (a < b) d.declarators.emplace_back(a, b);
                d.end = k;
                return d.names.empty() ? std::nullopt : std::optional<Declaration>(d);
            }
            --pd;
        } else if (t.text == "[") ++kd;
        else if (t.text == "]") --kd;
        else if (t.text == "," && pd == 0 && kd == 0) {
            auto [a, b] = trim_range(s, decl_a, k);
            if (a >= b) return std::nullopt;
            d.declarators.emplace_back(a, b);
            decl_a = k + 1;
            expect_name = true;
        } else if (t.text == ";" && pd == 0 && kd == 0) {
            auto [a, b] = trim_range(s, decl_a, k);
            if (a >= b) return std::nullopt;
            d.declarators.emplace_back(a, b);
            d.semi = k;
            d.end = k + 1;
            return d;
        }
    }
    return std::nullopt;
}

inline std::string slice_text(const std::vector<std::string>& texts, std::size_t a,
                              std::size_t b) {
    std::string out;
    for (std::size_t i = a; i < b && i < texts.size(); ++i) out += texts[i];
    return out;
}

inline bool is_statement_left_barrier(const TokenStream& s, std::size_t idx) {
    if (idx == npos) return true;  // start of file
    const std::string& t = s.tokens[idx].text;
    return t == ";" || t == "{" || t == "}";
}

inline unsigned long long parse_int_literal(const std::string& text) {
    if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X'))
        return std::stoull(text.substr(2), nullptr, 16);
    return std::stoull(text, nullptr, 10);
}

inline std::string to_hex_literal(unsigned long long v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "0x%llx", v);
    return buf;
}

inline std::string flip_relop(const std::string& op) {
    if (op == "<") return ">";
    if (op == ">") return "<";
    if (op == "<=") return ">=";
    if (op == ">=") return "<=";
    return op;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Attribute detection
// ---------------------------------------------------------------------------

struct SourceAnalysis {
    std::set<std::string> all_identifiers;
    std::set<std::string> function_names;
    std::vector<std::string> renameable;  // locals + params, first-declaration order
};

inline SourceAnalysis analyze_identifiers(const TokenStream& s) {
    using namespace detail;
    SourceAnalysis out;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const Token& t = s.tokens[i];
        if (t.kind == TokenKind::Identifier) out.all_identifiers.insert(t.text);
    }
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const Token& t = s.tokens[i];
        if (t.is_ws_or_comment() || !is_type_keyword(t)) continue;
        std::size_t p = prev_nz(s, i);
        // Skip interior type keywords of a multi-keyword run.
        if (p != npos && is_type_keyword(s.tokens[p])) continue;
        // Find the first identifier after the type run.
        std::size_t j = i;
        while (j < s.tokens.size() &&
               (s.tokens[j].is_ws_or_comment() || is_type_keyword(s.tokens[j]) ||
                s.tokens[j].text == "*"))
            ++j;
        if (j >= s.tokens.size() || s.tokens[j].kind != TokenKind::Identifier) continue;
        std::size_t after = next_nz(s, j);
        if (after != npos && text_is(s, after, "(")) {
            out.function_names.insert(s.tokens[j].text);
            continue;
        }
        auto decl = parse_declaration(s, i, 0);
        if (!decl) continue;
        for (const auto& name : decl->names) {
            if (seen.insert(name).second) out.renameable.push_back(name);
        }
    }
    return out;
}

inline std::vector<std::string> rename_pool_alternatives(
    const SourceAnalysis& info, std::size_t count = 8,
    const std::set<std::string>& extra_taken = {}) {
    std::vector<std::string> out;
    for (int i = 0; i < 1000 && out.size() < count; ++i) {
        std::string name = "v" + std::to_string(i);
        if (info.all_identifiers.count(name) || info.function_names.count(name) ||
            extra_taken.count(name))
            continue;
        out.push_back(name);
    }
    return out;
}

inline std::vector<AttributeInstance> detect_attributes(const TokenStream& s) {
    using namespace detail;
    std::vector<AttributeInstance> out;

    // T1: one instance per renameable identifier, anchored at first occurrence.
    SourceAnalysis info = analyze_identifiers(s);
    auto pool = rename_pool_alternatives(info);
    if (!pool.empty()) {
        for (const auto& name : info.renameable) {
            std::size_t first = npos;
            for (std::size_t i = 0; i < s.tokens.size(); ++i) {
                if (s.tokens[i].kind == TokenKind::Identifier && s.tokens[i].text == name) {
                    first = i;
                    break;
                }
            }
            if (first == npos) continue;
            out.push_back({TransformKind::IdentifierRename, first, first + 1, name, pool});
        }
    }

    // Running brace depth per token, used by T5 scope adjacency.
    std::vector<int> brace_depth(s.tokens.size(), 0);
    {
        int d = 0;
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            const std::string& t = s.tokens[i].text;
            if (t == "}") --d;
            brace_depth[i] = d;
            if (t == "{") ++d;
        }
    }

    // T2: loop style.
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const Token& t = s.tokens[i];
        if (t.kind != TokenKind::Keyword || (t.text != "for" && t.text != "while"))
            continue;
        auto L = parse_loop(s, i);
        if (!L) continue;
        if (L->is_for && L->has_continue) continue;
        out.push_back({TransformKind::LoopStyle, i, L->site_end(),
                       L->is_for ? "for" : "while",
                       {L->is_for ? "while" : "for"}});
    }

    // T3: assignment spelling, statement or for-step position only.
    auto right_barrier = [&](std::size_t idx) {
        return idx != npos && (text_is(s, idx, ";") || text_is(s, idx, ")"));
    };
    auto simple_rhs_end = [&](std::size_t a) -> std::size_t {
        // Returns one past a simple primary starting at non-ws token a:
        // IDENT | LITERAL | IDENT [ X ] with X a single token. npos otherwise.
        if (a == npos || a >= s.tokens.size()) return npos;
        const Token& t0 = s.tokens[a];
        if (t0.kind == TokenKind::IntegerLiteral || t0.kind == TokenKind::CharLiteral)
            return a + 1;
        if (t0.kind != TokenKind::Identifier) return npos;
        std::size_t nx = next_nz(s, a);
        if (nx != npos && text_is(s, nx, "[")) {
            std::size_t inner = next_nz(s, nx);
            if (inner == npos) return npos;
            const Token& ti = s.tokens[inner];
            if (ti.kind != TokenKind::Identifier && ti.kind != TokenKind::IntegerLiteral)
                return npos;
            std::size_t close = next_nz(s, inner);
            if (close == npos || !text_is(s, close, "]")) return npos;
            return close + 1;
        }
        return a + 1;
    };
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const Token& t = s.tokens[i];
        if (t.kind != TokenKind::Identifier) continue;
        std::size_t p = prev_nz(s, i);
        if (!is_statement_left_barrier(s, p) && !(p != npos && text_is(s, p, ";")))
            continue;
        // `(` as previous token is only accepted when it is a for-step start:
        // that case is already covered because the for header's second ';'
        // precedes the step.
        std::size_t op = next_nz(s, i);
        if (op == npos) continue;
        const std::string& ot = s.tokens[op].text;

        if (ot == "++" || ot == "--") {
            std::size_t after = next_nz(s, op);
            if (!right_barrier(after)) continue;
            out.push_back({TransformKind::AssignStyle, i, op + 1, "postfix",
                           {"compound", "expanded"}});
            continue;
        }
        if (ot == "+=" || ot == "-=" || ot == "*=" || ot == "/=" || ot == "%=") {
            std::size_t rhs = next_nz(s, op);
            std::size_t rend = simple_rhs_end(rhs);
            if (rend == npos) continue;
            std::size_t after = next_nz(s, rend - 1);
            if (!right_barrier(after)) continue;
            bool family_a = (ot == "+=" || ot == "-=") &&
                            s.tokens[rhs].text == "1" && rend == rhs + 1;
            std::vector<std::string> alts =
                family_a ? std::vector<std::string>{"postfix", "expanded"}
                         : std::vector<std::string>{"expanded"};
            out.push_back({TransformKind::AssignStyle, i, rend, "compound", alts});
            continue;
        }
        if (ot == "=") {
            std::size_t x2 = next_nz(s, op);
            if (x2 == npos || s.tokens[x2].kind != TokenKind::Identifier ||
                s.tokens[x2].text != t.text)
                continue;
            std::size_t bop = next_nz(s, x2);
            if (bop == npos) continue;
            const std::string& bt = s.tokens[bop].text;
            if (bt != "+" && bt != "-" && bt != "*" && bt != "/" && bt != "%") continue;
            std::size_t rhs = next_nz(s, bop);
            std::size_t rend = simple_rhs_end(rhs);
            if (rend == npos) continue;
            std::size_t after = next_nz(s, rend - 1);
            if (!right_barrier(after)) continue;
            bool family_a = (bt == "+" || bt == "-") && s.tokens[rhs].text == "1" &&
                            rend == rhs + 1;
            std::vector<std::string> alts =
                family_a ? std::vector<std::string>{"postfix", "compound"}
                         : std::vector<std::string>{"compound"};
            out.push_back({TransformKind::AssignStyle, i, rend, "expanded", alts});
            continue;
        }
    }

    // T4: brace style on single-statement control bodies.
    auto consider_body = [&](std::size_t body_start) {
        if (body_start == npos) return;
        static const std::set<std::string> control = {"if", "else", "for", "while", "do"};
        if (text_is(s, body_start, "{")) {
            if (s.match[body_start] < 0) return;
            std::size_t close = static_cast<std::size_t>(s.match[body_start]);
            std::size_t semis = 0, last_nz = npos;
            for (std::size_t i = body_start + 1; i < close; ++i) {
                const Token& t = s.tokens[i];
                if (t.is_ws_or_comment()) continue;
                if (t.text == "{") return;
                if (t.kind == TokenKind::Keyword &&
                    (control.count(t.text) || is_type_keyword(t)))
                    return;
                if (t.text == ";") ++semis;
                last_nz = i;
            }
            if (semis != 1 || last_nz == npos || !text_is(s, last_nz, ";")) return;
            if (next_nz(s, body_start) == last_nz) return;  // `{ ; }` not worth it
            out.push_back({TransformKind::BraceStyle, body_start, close + 1, "braced",
                           {"unbraced"}});
        } else {
            const Token& first = s.tokens[body_start];
            if (first.kind == TokenKind::Keyword &&
                (control.count(first.text) || is_type_keyword(first)))
                return;
            if (first.text == ";" || first.text == "{") return;
            int pd = 0;
            for (std::size_t i = body_start; i < s.tokens.size(); ++i) {
                const Token& t = s.tokens[i];
                if (t.is_ws_or_comment()) continue;
                if (t.text == "{" || t.text == "}") return;
                if (t.kind == TokenKind::Keyword && control.count(t.text)) return;
                if (t.text == "(") ++pd;
                else if (t.text == ")") {
                    if (pd == 0) return;  // ran out of the enclosing expression
                    --pd;
                } else if (t.text == ";" && pd == 0) {
                    out.push_back({TransformKind::BraceStyle, body_start, i + 1,
                                   "unbraced", {"braced"}});
                    return;
                }
            }
        }
    };
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const Token& t = s.tokens[i];
        if (t.kind != TokenKind::Keyword) continue;
        if (t.text == "if" || t.text == "for" || t.text == "while") {
            std::size_t open = next_nz(s, i);
            if (open == npos || !text_is(s, open, "(") || s.match[open] < 0) continue;
            std::size_t body = next_nz(s, static_cast<std::size_t>(s.match[open]));
            if ((t.text == "for" || t.text == "while") && body != npos &&
                text_is(s, body, ";"))
                continue;  // empty loop body; also the do-while tail shape
            consider_body(body);
        } else if (t.text == "else") {
            std::size_t body = next_nz(s, i);
            if (body != npos && text_is(s, body, "if")) continue;
            consider_body(body);
        }
    }

    // T5: declaration grouping at statement positions.
    {
        std::optional<Declaration> prev;
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            const Token& t = s.tokens[i];
            if (t.is_ws_or_comment() || !is_type_keyword(t)) continue;
            std::size_t p = prev_nz(s, i);
            if (p != npos && is_type_keyword(s.tokens[p])) continue;  // interior of run
            if (!is_statement_left_barrier(s, p)) continue;
            auto decl = parse_declaration(s, i, brace_depth[i]);
            if (!decl || decl->semi == npos) continue;
            if (decl->declarators.size() >= 2) {
                out.push_back({TransformKind::DeclGroup, decl->type_a, decl->semi + 1,
                               "merged", {"split"}});
                prev.reset();
                continue;
            }
            if (prev && prev->type_text == decl->type_text &&
                prev->brace_depth == decl->brace_depth &&
                detail::next_nz(s, prev->semi) == i) {
                out.push_back({TransformKind::DeclGroup, prev->type_a, decl->semi + 1,
                               "split", {"merged"}});
                prev.reset();  // greedy: a declaration joins at most one pair
                continue;
            }
            prev = decl;
        }
    }

    // T6: relational swap with single-token operands.
    {
        static const std::set<std::string> left_ok = {";", "(", ",", "{", "}",
                                                      "&&", "||", "=", "return"};
        static const std::set<std::string> right_ok = {";", ")", ",", "&&", "||"};
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            const Token& t = s.tokens[i];
            if (t.kind != TokenKind::Operator) continue;
            if (t.text != "<" && t.text != ">" && t.text != "<=" && t.text != ">=")
                continue;
            std::size_t l = prev_nz(s, i), r = next_nz(s, i);
            if (l == npos || r == npos) continue;
            const Token& lt = s.tokens[l];
            const Token& rt = s.tokens[r];
            auto single = [](const Token& x) {
                return x.kind == TokenKind::Identifier ||
                       x.kind == TokenKind::IntegerLiteral;
            };
            if (!single(lt) || !single(rt)) continue;
            std::size_t ll = prev_nz(s, l), rr = next_nz(s, r);
            if (ll != npos && !left_ok.count(s.tokens[ll].text)) continue;
            if (rr != npos && !right_ok.count(s.tokens[rr].text)) continue;
            out.push_back({TransformKind::RelationSwap, l, r + 1, t.text,
                           {detail::flip_relop(t.text)}});
        }
    }

    // T7: integer literal base. Octal-looking and suffixed literals are left
    // alone.
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        const Token& t = s.tokens[i];
        if (t.kind != TokenKind::IntegerLiteral) continue;
        const std::string& x = t.text;
        bool is_hex = x.size() > 2 && x[0] == '0' && (x[1] == 'x' || x[1] == 'X');
        bool is_dec = !x.empty() && (x == "0" || (x[0] >= '1' && x[0] <= '9'));
        if (!is_hex && !is_dec) continue;
        if (x.find_first_of("uUlL") != std::string::npos) continue;
        if (is_dec && x.find_first_not_of("0123456789") != std::string::npos) continue;
        out.push_back({TransformKind::LiteralBase, i, i + 1, is_hex ? "hex" : "dec",
                       {is_hex ? "dec" : "hex"}});
    }

    // Stable ordering: kind, then site.
    std::stable_sort(out.begin(), out.end(),
                     [](const AttributeInstance& a, const AttributeInstance& b) {
                         if (a.kind != b.kind) return a.kind < b.kind;
                         return a.site_begin < b.site_begin;
                     });
    return out;
}

// ---------------------------------------------------------------------------
// Application and replay
// ---------------------------------------------------------------------------

namespace detail {

// Rewrites for a single record against the (possibly already renamed) text
// table. Texts are spliced in place: replacement at site_begin, empties after.
inline void splice(std::vector<std::string>& texts, std::size_t a, std::size_t b,
                   std::string replacement) {
    texts[a] = std::move(replacement);
    for (std::size_t i = a + 1; i < b; ++i) texts[i].clear();
}

inline std::string rebuild_loop(const TokenStream& s,
                                const std::vector<std::string>& texts,
                                const LoopShape& L, const std::string& new_value) {
    auto text = [&](std::size_t a, std::size_t b) { return slice_text(texts, a, b); };
    if (new_value == "while") {
        std::string body_core =
            L.braced ? text(L.body_a + 1, L.body_b - 1) : text(L.body_a, L.body_b);
        auto [ca, cb] = std::pair<std::size_t, std::size_t>(L.cond_a, L.cond_b);
        std::string out = "{ " + text(L.init_a, L.init_b) + "; while (" +
                          text(ca, cb) + ") { ";
        auto [ta, tb] = trim_range(s, L.body_a + (L.braced ? 1 : 0),
                                   L.body_b - (L.braced ? 1 : 0));
        (void)ta; (void)tb;
        std::string core = body_core;
        // Trim leading/trailing blanks for readability; tokens stay intact.
        while (!core.empty() && (core.front() == ' ' || core.front() == '\n' ||
                                 core.front() == '\t'))
            core.erase(core.begin());
        while (!core.empty() && (core.back() == ' ' || core.back() == '\n' ||
                                 core.back() == '\t'))
            core.pop_back();
        out += core;
        if (!core.empty()) out += ' ';
        out += text(L.step_a, L.step_b) + "; } }";
        return out;
    }
    // while -> for: keep the body verbatim, empty init/step slots.
    return "for (; " + text(L.cond_a, L.cond_b) + "; )" +
           slice_text(texts, L.close + 1, L.body_b);
}

}  // namespace detail

// Applies one record to the token stream whose indices the record refers to.
// Rename records substitute globally; all other kinds splice their site.
inline std::string apply_record(const TokenStream& s, const TransformationRecord& rec) {
    using namespace detail;
    std::vector<std::string> texts;
    texts.reserve(s.tokens.size());
    for (const auto& t : s.tokens) texts.push_back(t.text);

    switch (rec.kind) {
        case TransformKind::IdentifierRename: {
            for (const auto& name : {rec.new_value}) {
                if (c_keywords().count(name))
                    throw TransformError("rename target '" + name + "' is a keyword");
            }
            for (std::size_t i = 0; i < s.tokens.size(); ++i) {
                if (s.tokens[i].kind == TokenKind::Identifier &&
                    s.tokens[i].text == rec.old_value)
                    texts[i] = rec.new_value;
            }
            break;
        }
        case TransformKind::LoopStyle: {
            auto L = parse_loop(s, rec.site_begin);
            if (!L) throw TransformError("malformed loop site");
            splice(texts, rec.site_begin, rec.site_end,
                   rebuild_loop(s, texts, *L, rec.new_value));
            break;
        }
        case TransformKind::AssignStyle: {
            // Recover variable, operator family, and RHS from the site tokens.
            std::vector<std::size_t> nz;
            for (std::size_t i = rec.site_begin; i < rec.site_end; ++i)
                if (!s.tokens[i].is_ws_or_comment()) nz.push_back(i);
            if (nz.empty()) throw TransformError("malformed assignment site");
            std::string var = texts[nz[0]];
            char op = '+';
            std::string rhs = "1";
            if (rec.old_value == "postfix") {
                op = s.tokens[nz[1]].text == "++" ? '+' : '-';
            } else if (rec.old_value == "compound") {
                op = s.tokens[nz[1]].text[0];
                rhs = slice_text(texts, nz[2], rec.site_end);
            } else {  // expanded: x = x op rhs
                op = s.tokens[nz[3]].text[0];
                rhs = slice_text(texts, nz[4], rec.site_end);
            }
            std::string repl;
            if (rec.new_value == "postfix")
                repl = var + (op == '+' ? "++" : "--");
            else if (rec.new_value == "compound")
                repl = var + " " + op + "= " + rhs;
            else
                repl = var + " = " + var + " " + op + " " + rhs;
            splice(texts, rec.site_begin, rec.site_end, repl);
            break;
        }
        case TransformKind::BraceStyle: {
            if (rec.new_value == "unbraced") {
                auto [a, b] = detail::trim_range(s, rec.site_begin + 1, rec.site_end - 1);
                splice(texts, rec.site_begin, rec.site_end, slice_text(texts, a, b));
            } else {
                splice(texts, rec.site_begin, rec.site_end,
                       "{ " + slice_text(texts, rec.site_begin, rec.site_end) + " }");
            }
            break;
        }
        case TransformKind::DeclGroup: {
            if (rec.new_value == "split") {
                auto decl = detail::parse_declaration(
                    s, rec.site_begin, 0);
                if (!decl || decl->declarators.size() < 2)
                    throw TransformError("malformed declaration site");
                std::string type = slice_text(texts, decl->type_a, decl->type_b);
                std::string repl;
                for (std::size_t d = 0; d < decl->declarators.size(); ++d) {
                    if (d) repl += ' ';
                    repl += type + " " +
                            slice_text(texts, decl->declarators[d].first,
                                       decl->declarators[d].second) +
                            ";";
                }
                splice(texts, rec.site_begin, rec.site_end, repl);
            } else {
                auto first = detail::parse_declaration(s, rec.site_begin, 0);
                if (!first || first->semi == detail::npos)
                    throw TransformError("malformed declaration site");
                std::size_t second_start = detail::next_nz(s, first->semi);
                auto second = detail::parse_declaration(s, second_start, 0);
                if (!second) throw TransformError("malformed declaration site");
                std::string repl =
                    slice_text(texts, first->type_a, first->type_b) + " " +
                    slice_text(texts, first->declarators[0].first,
                               first->declarators[0].second) +
                    ", " +
                    slice_text(texts, second->declarators[0].first,
                               second->declarators[0].second) +
                    ";";
                splice(texts, rec.site_begin, rec.site_end, repl);
            }
            break;
        }
        case TransformKind::RelationSwap: {
            std::vector<std::size_t> nz;
            for (std::size_t i = rec.site_begin; i < rec.site_end; ++i)
                if (!s.tokens[i].is_ws_or_comment()) nz.push_back(i);
            if (nz.size() != 3) throw TransformError("malformed relation site");
            std::string ws1 = slice_text(texts, nz[0] + 1, nz[1]);
            std::string ws2 = slice_text(texts, nz[1] + 1, nz[2]);
            splice(texts, rec.site_begin, rec.site_end,
                   texts[nz[2]] + ws1 + rec.new_value + ws2 + texts[nz[0]]);
            break;
        }
        case TransformKind::LiteralBase: {
            unsigned long long v = detail::parse_int_literal(s.tokens[rec.site_begin].text);
            splice(texts, rec.site_begin, rec.site_end,
                   rec.new_value == "hex" ? detail::to_hex_literal(v)
                                          : std::to_string(v));
            break;
        }
    }

    return detail::slice_text(texts, 0, texts.size());
}

inline std::pair<std::string, TransformationRecord> apply_transformation(
    const TokenStream& s, const AttributeInstance& instance,
    const std::string& new_value) {
    if (std::find(instance.alternatives.begin(), instance.alternatives.end(),
                  new_value) == instance.alternatives.end())
        throw TransformError("value '" + new_value + "' is not an alternative of '" +
                             instance.current_value + "'");
    if (instance.kind == TransformKind::IdentifierRename) {
        for (const auto& t : s.tokens) {
            if ((t.kind == TokenKind::Identifier || t.kind == TokenKind::Keyword) &&
                t.text == new_value)
                throw TransformError("rename collision: '" + new_value +
                                     "' already in scope");
        }
    }
    TransformationRecord rec{instance.kind, instance.site_begin, instance.site_end,
                             instance.current_value, new_value};
    return {apply_record(s, rec), rec};
}

// Applies a full record set: renames first (they do not shift token indices),
// then site rewrites. Sites must be pairwise disjoint, so order is immaterial.
inline std::string apply_records(const TokenStream& s,
                                 const std::vector<TransformationRecord>& records) {
    using namespace detail;
    std::vector<std::string> texts;
    texts.reserve(s.tokens.size());
    for (const auto& t : s.tokens) texts.push_back(t.text);

    for (const auto& rec : records) {
        if (rec.kind != TransformKind::IdentifierRename) continue;
        for (std::size_t i = 0; i < s.tokens.size(); ++i)
            if (s.tokens[i].kind == TokenKind::Identifier &&
                s.tokens[i].text == rec.old_value)
                texts[i] = rec.new_value;
    }
    for (const auto& rec : records) {
        if (rec.kind == TransformKind::IdentifierRename) continue;
        std::string repl;
        switch (rec.kind) {
            case TransformKind::LoopStyle: {
                auto L = parse_loop(s, rec.site_begin);
                if (!L) throw TransformError("malformed loop site");
                repl = rebuild_loop(s, texts, *L, rec.new_value);
                break;
            }
            default: {
                // Single-record path on a sub-splice: reuse apply_record by
                // building a temporary record against the renamed texts.
                TokenStream renamed = s;
                for (std::size_t i = 0; i < renamed.tokens.size(); ++i)
                    renamed.tokens[i].text = texts[i];
                std::string whole = apply_record(renamed, rec);
                // Extract the replacement slice: everything between the
                // untouched prefix and suffix.
                std::string prefix = slice_text(texts, 0, rec.site_begin);
                std::string suffix = slice_text(texts, rec.site_end, texts.size());
                repl = whole.substr(prefix.size(),
                                    whole.size() - prefix.size() - suffix.size());
                break;
            }
        }
        splice(texts, rec.site_begin, rec.site_end, repl);
    }
    return slice_text(texts, 0, texts.size());
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<const Token*> nonws(const TokenStream& s) {
    std::vector<const Token*> out;
    for (const auto& t : s.tokens)
        if (!t.is_ws_or_comment()) out.push_back(&t);
    return out;
}

inline bool outside_identical(const TokenStream& before, const TokenStream& after,
                              const TransformationRecord& rec) {
    std::string pre, post;
    for (std::size_t i = 0; i < rec.site_begin; ++i) pre += before.tokens[i].text;
    for (std::size_t i = rec.site_end; i < before.tokens.size(); ++i)
        post += before.tokens[i].text;
    std::string whole = after.detokenize();
    if (whole.size() < pre.size() + post.size()) return false;
    return whole.compare(0, pre.size(), pre) == 0 &&
           whole.compare(whole.size() - post.size(), post.size(), post) == 0;
}

inline bool contains_subsequence(const std::vector<std::string>& haystack,
                                 const std::vector<std::string>& needle) {
    if (needle.empty()) return true;
    if (needle.size() > haystack.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
        bool ok = true;
        for (std::size_t j = 0; j < needle.size(); ++j)
            if (haystack[i + j] != needle[j]) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

}  // namespace detail

// Kind-specific semantics-preservation predicate. Returns false on any
// violation; never throws for well-formed streams.
inline bool verify_transformation(const TokenStream& before, const TokenStream& after,
                                  const TransformationRecord& rec) {
    using namespace detail;
    auto b = nonws(before);
    auto a = nonws(after);

    switch (rec.kind) {
        case TransformKind::IdentifierRename: {
            if (a.size() != b.size()) return false;
            for (const Token* t : b)
                if (t->kind == TokenKind::Identifier && t->text == rec.new_value)
                    return false;  // collision: substitution not bijective
            for (std::size_t i = 0; i < b.size(); ++i) {
                if (b[i]->kind == TokenKind::Identifier && b[i]->text == rec.old_value) {
                    if (a[i]->text != rec.new_value) return false;
                } else if (a[i]->text != b[i]->text || a[i]->kind != b[i]->kind) {
                    return false;
                }
            }
            return true;
        }
        case TransformKind::LoopStyle: {
            auto L = parse_loop(before, rec.site_begin);
            if (!L) return false;
            // Keyword multiset differs only in for/while.
            std::multiset<std::string> kb, ka;
            for (const Token* t : b)
                if (t->kind == TokenKind::Keyword && t->text != "for" && t->text != "while")
                    kb.insert(t->text);
            for (const Token* t : a)
                if (t->kind == TokenKind::Keyword && t->text != "for" && t->text != "while")
                    ka.insert(t->text);
            if (kb != ka) return false;
            // Header components survive as contiguous token runs.
            std::vector<std::string> atoks;
            for (const Token* t : a) atoks.push_back(t->text);
            auto comp = [&](std::size_t x, std::size_t y) {
                std::vector<std::string> c;
                for (std::size_t i = x; i < y; ++i)
                    if (!before.tokens[i].is_ws_or_comment())
                        c.push_back(before.tokens[i].text);
                return c;
            };
            if (L->is_for) {
                if (!contains_subsequence(atoks, comp(L->init_a, L->init_b))) return false;
                if (!contains_subsequence(atoks, comp(L->step_a, L->step_b))) return false;
            }
            return contains_subsequence(atoks, comp(L->cond_a, L->cond_b)) &&
                   outside_identical(before, after, rec);
        }
        case TransformKind::AssignStyle: {
            if (!outside_identical(before, after, rec)) return false;
            std::string expected = apply_record(before, rec);
            return expected == after.detokenize();
        }
        case TransformKind::BraceStyle: {
            if (!outside_identical(before, after, rec)) return false;
            // Identical modulo one brace pair.
            std::vector<std::string> tb, ta;
            for (const Token* t : b) tb.push_back(t->text);
            for (const Token* t : a) ta.push_back(t->text);
            long diff = static_cast<long>(ta.size()) - static_cast<long>(tb.size());
            if (rec.new_value == "braced" && diff != 2) return false;
            if (rec.new_value == "unbraced" && diff != -2) return false;
            std::multiset<std::string> mb(tb.begin(), tb.end()), ma(ta.begin(), ta.end());
            if (rec.new_value == "braced") {
                ma.erase(ma.find("{"));
                ma.erase(ma.find("}"));
            } else {
                mb.erase(mb.find("{"));
                mb.erase(mb.find("}"));
            }
            return mb == ma;
        }
        case TransformKind::DeclGroup: {
            if (!outside_identical(before, after, rec)) return false;
            // Identifier and literal multiset preserved inside the site.
            auto site_multiset = [&](const TokenStream& s, std::size_t x, std::size_t y) {
                std::multiset<std::string> m;
                for (std::size_t i = x; i < y && i < s.tokens.size(); ++i) {
                    const Token& t = s.tokens[i];
                    if (t.kind == TokenKind::Identifier ||
                        t.kind == TokenKind::IntegerLiteral)
                        m.insert(t.text);
                }
                return m;
            };
            std::multiset<std::string> mb =
                site_multiset(before, rec.site_begin, rec.site_end);
            std::multiset<std::string> ma;
            for (const Token* t : a)
                if (t->kind == TokenKind::Identifier || t->kind == TokenKind::IntegerLiteral)
                    ma.insert(t->text);
            std::multiset<std::string> mb_all;
            for (const Token* t : b)
                if (t->kind == TokenKind::Identifier || t->kind == TokenKind::IntegerLiteral)
                    mb_all.insert(t->text);
            (void)mb;
            return ma == mb_all &&
                   apply_record(before, rec) == after.detokenize();
        }
        case TransformKind::RelationSwap: {
            if (!outside_identical(before, after, rec)) return false;
            std::vector<std::size_t> nz;
            for (std::size_t i = rec.site_begin; i < rec.site_end; ++i)
                if (!before.tokens[i].is_ws_or_comment()) nz.push_back(i);
            if (nz.size() != 3) return false;
            if (flip_relop(rec.old_value) != rec.new_value) return false;
            return apply_record(before, rec) == after.detokenize();
        }
        case TransformKind::LiteralBase: {
            if (!outside_identical(before, after, rec)) return false;
            std::string expected = apply_record(before, rec);
            if (expected != after.detokenize()) return false;
            // Numeric value preserved across the respelling.
            std::string prefix;
            for (std::size_t i = 0; i < rec.site_begin; ++i)
                prefix += before.tokens[i].text;
            TokenStream at = after;
            std::size_t pos = 0, off = 0;
            while (pos < at.tokens.size() && off < prefix.size()) {
                off += at.tokens[pos].text.size();
                ++pos;
            }
            if (pos >= at.tokens.size()) return false;
            return parse_int_literal(at.tokens[pos].text) ==
                   parse_int_literal(before.tokens[rec.site_begin].text);
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Candidate generation (Step I, before the prediction filter)
// ---------------------------------------------------------------------------

inline bool sites_overlap(const AttributeInstance& x, const AttributeInstance& y) {
    return x.site_begin < y.site_end && y.site_begin < x.site_end;
}

struct Candidate {
    CodeExample example;
    std::vector<TransformationRecord> records;
};

// Produces exactly m perturbed variants, each applying theta distinct
// attribute instances. Rename instances are exempt from the overlap rule;
// sampled site sets that clash are redrawn up to 16 times.
inline std::vector<Candidate> generate_candidates(const CodeExample& example,
                                                  std::size_t theta, std::size_t m,
                                                  std::uint64_t seed) {
    const TokenStream stream = tokenize(example.source);
    const std::vector<AttributeInstance> instances = detect_attributes(stream);
    const std::size_t t_i = instances.size();
    if (t_i <= theta) {
        throw TransformError("example '" + example.id + "' has t_i=" +
                             std::to_string(t_i) + " attribute instances, need > " +
                             std::to_string(theta));
    }

    std::uint64_t base = splitmix64(seed ^ fnv1a(example.id));
    std::vector<Candidate> out;
    out.reserve(m);
    for (std::size_t j = 0; j < m; ++j) {
        Rng rng(derive_seed(base, "candidate", j));
        std::vector<std::size_t> chosen;
        bool ok = false;
        for (int attempt = 0; attempt < 16 && !ok; ++attempt) {
            chosen = rng.sample_without_replacement(t_i, theta);
            ok = true;
            for (std::size_t x = 0; x < chosen.size() && ok; ++x) {
                for (std::size_t y = x + 1; y < chosen.size() && ok; ++y) {
                    const auto& ix = instances[chosen[x]];
                    const auto& iy = instances[chosen[y]];
                    if (ix.kind == TransformKind::IdentifierRename ||
                        iy.kind == TransformKind::IdentifierRename)
                        continue;
                    if (sites_overlap(ix, iy)) ok = false;
                }
            }
        }
        if (!ok)
            throw TransformError("example '" + example.id +
                                 "': could not sample non-overlapping attribute "
                                 "instances after 16 attempts");

        std::sort(chosen.begin(), chosen.end());
        std::set<std::string> taken_names;
        std::vector<TransformationRecord> records;
        for (std::size_t idx : chosen) {
            const AttributeInstance& inst = instances[idx];
            std::vector<std::string> alts = inst.alternatives;
            if (inst.kind == TransformKind::IdentifierRename) {
                std::vector<std::string> filtered;
                for (const auto& v : alts)
                    if (!taken_names.count(v)) filtered.push_back(v);
                alts = filtered;
                if (alts.empty())
                    throw TransformError("example '" + example.id +
                                         "': rename pool exhausted");
            }
            const std::string& choice = alts[rng.next_index(alts.size())];
            if (inst.kind == TransformKind::IdentifierRename) taken_names.insert(choice);
            records.push_back({inst.kind, inst.site_begin, inst.site_end,
                               inst.current_value, choice});
        }

        Candidate cand;
        cand.records = std::move(records);
        cand.example.id = example.id + "+p" + std::to_string(j);
        cand.example.source = apply_records(stream, cand.records);
        cand.example.label = example.label;
        cand.example.origin = ExampleOrigin::Perturbed;
        cand.example.origin_id = example.id;
        out.push_back(std::move(cand));
    }
    return out;
}

}  // namespace robin
