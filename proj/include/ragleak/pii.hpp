#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace ragleak {

/// PII values recovered from a text, deduplicated, in order of first
/// occurrence. Patterns are deliberately conservative North-American formats.
struct PiiMatches {
    std::vector<std::string> phone;
    std::vector<std::string> email;
    std::vector<std::string> url;

    size_t total_unique() const { return phone.size() + email.size() + url.size(); }
    bool empty() const { return phone.empty() && email.empty() && url.empty(); }
};

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_alpha(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
inline bool is_alnum(char c) { return is_digit(c) || is_alpha(c); }

inline bool is_phone_sep(char c) { return c == '-' || c == '.' || c == ' '; }

inline bool is_email_local_char(char c) {
    return is_alnum(c) || c == '.' || c == '_' || c == '%' || c == '+' || c == '-';
}
inline bool is_email_domain_char(char c) { return is_alnum(c) || c == '.' || c == '-'; }

inline void push_unique(std::vector<std::string>& out, std::string value) {
    for (const auto& v : out)
        if (v == value) return;
    out.push_back(std::move(value));
}

inline bool digits_at(std::string_view s, size_t pos, size_t count) {
    if (pos + count > s.size()) return false;
    for (size_t i = 0; i < count; ++i)
        if (!is_digit(s[pos + i])) return false;
    return true;
}

// Matches NNN-NNN-NNNN style (separators -, ., space) or (NNN) NNN-NNNN at
// position i. Returns match length or 0.
inline size_t match_phone_at(std::string_view s, size_t i) {
    if (i > 0 && (is_digit(s[i - 1]))) return 0;
    size_t p = i;
    if (s[p] == '(') {
        if (!digits_at(s, p + 1, 3) || p + 4 >= s.size() || s[p + 4] != ')') return 0;
        p += 5;
        if (p < s.size() && s[p] == ' ') ++p;
    } else if (digits_at(s, p, 3)) {
        p += 3;
        if (p >= s.size() || !is_phone_sep(s[p])) return 0;
        ++p;
    } else {
        return 0;
    }
    if (!digits_at(s, p, 3)) return 0;
    p += 3;
    if (p >= s.size() || !is_phone_sep(s[p])) return 0;
    ++p;
    if (!digits_at(s, p, 4)) return 0;
    p += 4;
    if (p < s.size() && is_digit(s[p])) return 0;
    return p - i;
}

inline std::string trim_url_tail(std::string url) {
    static constexpr std::string_view kTail = ".,;:!?)]}\"'";
    while (!url.empty() && kTail.find(url.back()) != std::string_view::npos) url.pop_back();
    return url;
}

}  // namespace detail

/// Extracts phone numbers (10-digit North-American forms with -, ., space or
/// parenthesized area-code separators), email addresses (local@domain.tld)
/// and URLs (http(s) scheme or www. prefix) from `text`.
inline PiiMatches extract_pii(std::string_view text) {
    using namespace detail;
    PiiMatches out;
    const size_t n = text.size();

    for (size_t i = 0; i < n; ++i) {
        if (text[i] == '(' || is_digit(text[i])) {
            size_t len = match_phone_at(text, i);
            if (len > 0) {
                push_unique(out.phone, std::string(text.substr(i, len)));
                i += len - 1;
            }
        }
    }

    for (size_t i = 0; i < n; ++i) {
        if (text[i] != '@') continue;
        size_t lo = i;
        while (lo > 0 && is_email_local_char(text[lo - 1])) --lo;
        if (lo == i) continue;
        size_t hi = i + 1;
        while (hi < n && is_email_domain_char(text[hi])) ++hi;
        std::string domain(text.substr(i + 1, hi - i - 1));
        while (!domain.empty() && (domain.back() == '.' || domain.back() == '-'))
            domain.pop_back();
        // Domain needs a dot and an alphabetic final label of length >= 2.
        size_t dot = domain.rfind('.');
        if (dot == std::string::npos || dot == 0 || dot + 3 > domain.size()) continue;
        bool tld_ok = true;
        for (size_t j = dot + 1; j < domain.size(); ++j)
            if (!is_alpha(domain[j])) tld_ok = false;
        if (!tld_ok || domain.find("..") != std::string::npos) continue;
        push_unique(out.email, std::string(text.substr(lo, i - lo)) + "@" + domain);
        i = hi;
    }

    for (size_t i = 0; i < n; ++i) {
        size_t start = std::string_view::npos;
        if (text.compare(i, 7, "http://") == 0 || text.compare(i, 8, "https://") == 0) {
            start = i;
        } else if (text.compare(i, 4, "www.") == 0 &&
                   (i == 0 || (!is_alnum(text[i - 1]) && text[i - 1] != '/' &&
                               text[i - 1] != '.'))) {
            start = i;
        }
        if (start == std::string_view::npos) continue;
        size_t end = start;
        while (end < n && !std::isspace(static_cast<unsigned char>(text[end])) &&
               text[end] != '<' && text[end] != '>' && text[end] != '"')
            ++end;
        std::string url = trim_url_tail(std::string(text.substr(start, end - start)));
        // Require something after the scheme / www. prefix.
        size_t body = url.find("://");
        size_t min_len = body != std::string::npos ? body + 4 : 5;
        if (url.size() >= min_len) push_unique(out.url, url);
        i = end;
    }

    return out;
}

}  // namespace ragleak
