#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "robin/errors.hpp"

namespace robin {

enum class TokenKind {
    Identifier,
    Keyword,
    IntegerLiteral,
    StringLiteral,
    CharLiteral,
    Operator,
    Punctuation,
    Whitespace,
    Comment,
};

struct Token {
    TokenKind kind;
    std::string text;
    int line = 1;
    int column = 1;

    bool is_ws_or_comment() const {
        return kind == TokenKind::Whitespace || kind == TokenKind::Comment;
    }
};

// Lossless token stream: concatenating `tokens[i].text` in order reproduces
// the input byte for byte. `match[i]` holds the index of the delimiter token
// matching tokens[i] for ()/{}/[] pairs, -1 elsewhere.
struct TokenStream {
    std::vector<Token> tokens;
    std::vector<int> match;

    std::string detokenize() const {
        std::string out;
        for (const auto& t : tokens) out += t.text;
        return out;
    }

    std::size_t size() const { return tokens.size(); }

    std::size_t non_ws_count() const {
        std::size_t n = 0;
        for (const auto& t : tokens)
            if (!t.is_ws_or_comment()) ++n;
        return n;
    }
};

inline const std::unordered_set<std::string>& c_keywords() {
    static const std::unordered_set<std::string> kw = {
        "auto", "break", "case", "char", "const", "continue", "default", "do",
        "double", "else", "enum", "extern", "float", "for", "goto", "if",
        "int", "long", "register", "return", "short", "signed", "sizeof",
        "static", "struct", "switch", "typedef", "union", "unsigned", "void",
        "volatile", "while"};
    return kw;
}

namespace detail {

inline bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
}
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_hex_digit(char c) {
    return is_digit(c) || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
}

// Longest-first so maximal munch falls out of the scan order.
inline const std::array<std::string_view, 19>& multi_char_operators() {
    static const std::array<std::string_view, 19> ops = {
        "<<=", ">>=", "++", "--", "+=", "-=", "*=", "/=", "%=",
        "==", "!=", "<=", ">=", "&&", "||", "<<", ">>", "->", "&="};
    return ops;
}

}  // namespace detail

inline TokenStream tokenize(std::string_view source) {
    TokenStream stream;
    std::size_t i = 0;
    int line = 1, col = 1;

    auto advance = [&](std::size_t len) {
        for (std::size_t k = 0; k < len; ++k) {
            if (source[i + k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        i += len;
    };

    auto push = [&](TokenKind kind, std::size_t len) {
        Token t{kind, std::string(source.substr(i, len)), line, col};
        stream.tokens.push_back(std::move(t));
        advance(len);
    };

    while (i < source.size()) {
        char c = source[i];
        int tok_line = line, tok_col = col;

        if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f') {
            std::size_t j = i;
            while (j < source.size() &&
                   (source[j] == ' ' || source[j] == '\t' || source[j] == '\n' ||
                    source[j] == '\r' || source[j] == '\v' || source[j] == '\f'))
                ++j;
            push(TokenKind::Whitespace, j - i);
            continue;
        }

        if (c == '/' && i + 1 < source.size() && source[i + 1] == '/') {
            std::size_t j = i;
            while (j < source.size() && source[j] != '\n') ++j;
            push(TokenKind::Comment, j - i);
            continue;
        }

        if (c == '/' && i + 1 < source.size() && source[i + 1] == '*') {
            std::size_t j = i + 2;
            while (j + 1 < source.size() && !(source[j] == '*' && source[j + 1] == '/'))
                ++j;
            if (j + 1 >= source.size())
                throw LexError("unterminated comment", tok_line, tok_col);
            push(TokenKind::Comment, j + 2 - i);
            continue;
        }

        if (c == '"' || c == '\'') {
            const char quote = c;
            std::size_t j = i + 1;
            bool closed = false;
            while (j < source.size()) {
                if (source[j] == '\\' && j + 1 < source.size()) {
                    j += 2;
                    continue;
                }
                if (source[j] == quote) {
                    closed = true;
                    ++j;
                    break;
                }
                if (source[j] == '\n') break;
                ++j;
            }
            if (!closed) {
                throw LexError(quote == '"' ? "unterminated string literal"
                                            : "unterminated char literal",
                               tok_line, tok_col);
            }
            push(quote == '"' ? TokenKind::StringLiteral : TokenKind::CharLiteral, j - i);
            continue;
        }

        if (detail::is_digit(c)) {
            std::size_t j = i;
            if (c == '0' && i + 1 < source.size() &&
                (source[i + 1] == 'x' || source[i + 1] == 'X')) {
                j = i + 2;
                while (j < source.size() && detail::is_hex_digit(source[j])) ++j;
            } else {
                while (j < source.size() && detail::is_digit(source[j])) ++j;
            }
            // Integer suffixes stay part of the literal text.
            while (j < source.size() &&
                   (source[j] == 'u' || source[j] == 'U' || source[j] == 'l' ||
                    source[j] == 'L'))
                ++j;
            push(TokenKind::IntegerLiteral, j - i);
            continue;
        }

        if (detail::is_ident_start(c)) {
            std::size_t j = i;
            while (j < source.size() && detail::is_ident_char(source[j])) ++j;
            std::string text(source.substr(i, j - i));
            bool kw = c_keywords().count(text) > 0;
            push(kw ? TokenKind::Keyword : TokenKind::Identifier, j - i);
            continue;
        }

        if (c == '(' || c == ')' || c == '{' || c == '}' || c == '[' || c == ']' ||
            c == ';' || c == ',') {
            push(TokenKind::Punctuation, 1);
            continue;
        }

        {
            bool matched = false;
            for (std::string_view op : detail::multi_char_operators()) {
                if (source.substr(i, op.size()) == op) {
                    push(TokenKind::Operator, op.size());
                    matched = true;
                    break;
                }
            }
            if (matched) continue;
        }

        static const std::string single_ops = "+-*/%=<>!&|^~?:.#";
        if (single_ops.find(c) != std::string::npos) {
            push(TokenKind::Operator, 1);
            continue;
        }

        throw LexError(std::string("unexpected character '") + c + "'", tok_line, tok_col);
    }

    // Balanced-delimiter side table.
    stream.match.assign(stream.tokens.size(), -1);
    std::vector<std::size_t> stack;
    for (std::size_t t = 0; t < stream.tokens.size(); ++t) {
        const Token& tok = stream.tokens[t];
        if (tok.kind != TokenKind::Punctuation) continue;
        char ch = tok.text[0];
        if (ch == '(' || ch == '{' || ch == '[') {
            stack.push_back(t);
        } else if (ch == ')' || ch == '}' || ch == ']') {
            const char open = ch == ')' ? '(' : (ch == '}' ? '{' : '[');
            if (stack.empty() || stream.tokens[stack.back()].text[0] != open)
                throw LexError("unbalanced delimiter '" + tok.text + "'", tok.line,
                               tok.column);
            stream.match[t] = static_cast<int>(stack.back());
            stream.match[stack.back()] = static_cast<int>(t);
            stack.pop_back();
        }
    }
    if (!stack.empty()) {
        const Token& tok = stream.tokens[stack.back()];
        throw LexError("unmatched delimiter '" + tok.text + "'", tok.line, tok.column);
    }

    return stream;
}

inline bool lexes(std::string_view source) {
    try {
        tokenize(source);
        return true;
    } catch (const LexError&) {
        return false;
    }
}

}  // namespace robin
