#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace ragleak {

/// Token sequence produced by the canonical tokenizer. Tokens are non-empty,
/// lowercase, whitespace-free strings with no leading/trailing punctuation.
using TokenSeq = std::vector<std::string>;

namespace detail {

inline bool is_space_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline bool is_punct_byte(unsigned char c) {
    return c < 0x80 && std::ispunct(c) != 0;
}

inline char lower_byte(unsigned char c) {
    if (c < 0x80) return static_cast<char>(std::tolower(c));
    return static_cast<char>(c);  // non-ASCII bytes pass through
}

}  // namespace detail

/// Canonical tokenizer used for every token-based rule in the toolkit:
/// lowercase, split on whitespace, strip leading/trailing punctuation from
/// each token, drop tokens that end up empty. Inner punctuation ("a-b",
/// "don't", "713-420-3227") is preserved.
inline TokenSeq tokenize(std::string_view text) {
    TokenSeq out;
    size_t i = 0;
    const size_t n = text.size();
    while (i < n) {
        while (i < n && detail::is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        size_t start = i;
        while (i < n && !detail::is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i == start) break;
        size_t lo = start, hi = i;
        while (lo < hi && detail::is_punct_byte(static_cast<unsigned char>(text[lo]))) ++lo;
        while (hi > lo && detail::is_punct_byte(static_cast<unsigned char>(text[hi - 1]))) --hi;
        if (hi > lo) {
            std::string tok;
            tok.reserve(hi - lo);
            for (size_t j = lo; j < hi; ++j)
                tok.push_back(detail::lower_byte(static_cast<unsigned char>(text[j])));
            out.push_back(std::move(tok));
        }
    }
    return out;
}

/// Number of canonical tokens in `text`.
inline size_t token_count(std::string_view text) { return tokenize(text).size(); }

/// Joins tokens with single spaces. Re-tokenizing the result reproduces the
/// input token list exactly (tokens are already canonical).
inline std::string join_tokens(const TokenSeq& tokens, size_t begin = 0,
                               size_t end = static_cast<size_t>(-1)) {
    if (end > tokens.size()) end = tokens.size();
    std::string out;
    for (size_t i = begin; i < end; ++i) {
        if (i > begin) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace ragleak
