#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ragleak/tokenizer.hpp"

namespace ragleak {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

namespace detail {

/// Interns two token sequences into integer ids sharing one vocabulary.
inline void intern_tokens(const TokenSeq& a, const TokenSeq& b,
                          std::vector<int>& ia, std::vector<int>& ib) {
    std::unordered_map<std::string_view, int> vocab;
    vocab.reserve(a.size() + b.size());
    auto id_of = [&vocab](const std::string& tok) {
        auto [it, inserted] = vocab.emplace(tok, static_cast<int>(vocab.size()));
        return it->second;
    };
    ia.clear();
    ia.reserve(a.size());
    for (const auto& t : a) ia.push_back(id_of(t));
    ib.clear();
    ib.reserve(b.size());
    for (const auto& t : b) ib.push_back(id_of(t));
}

/// Suffix automaton over an integer sequence. Used to find the longest
/// contiguous run shared with another sequence in O(n + m) transitions.
class SuffixAutomaton {
public:
    explicit SuffixAutomaton(const std::vector<int>& seq) {
        states_.reserve(2 * seq.size() + 2);
        states_.push_back({0, -1, {}});
        int last = 0;
        for (int c : seq) {
            int cur = static_cast<int>(states_.size());
            states_.push_back({states_[last].len + 1, -1, {}});
            int p = last;
            while (p != -1 && !states_[p].next.count(c)) {
                states_[p].next[c] = cur;
                p = states_[p].link;
            }
            if (p == -1) {
                states_[cur].link = 0;
            } else {
                int q = states_[p].next[c];
                if (states_[p].len + 1 == states_[q].len) {
                    states_[cur].link = q;
                } else {
                    int clone = static_cast<int>(states_.size());
                    states_.push_back(states_[q]);
                    states_[clone].len = states_[p].len + 1;
                    while (p != -1 && states_[p].next[c] == q) {
                        states_[p].next[c] = clone;
                        p = states_[p].link;
                    }
                    states_[q].link = clone;
                    states_[cur].link = clone;
                }
            }
            last = cur;
        }
    }

    /// Longest factor of the automaton's sequence that occurs in `other`.
    size_t longest_common_factor(const std::vector<int>& other) const {
        size_t best = 0;
        int v = 0;
        int len = 0;
        for (int c : other) {
            while (v != 0 && !states_[v].next.count(c)) {
                v = states_[v].link;
                len = states_[v].len;
            }
            auto it = states_[v].next.find(c);
            if (it != states_[v].next.end()) {
                v = it->second;
                ++len;
            } else {
                v = 0;
                len = 0;
            }
            best = std::max(best, static_cast<size_t>(len));
        }
        return best;
    }

private:
    struct State {
        int len;
        int link;
        std::unordered_map<int, int> next;
    };
    std::vector<State> states_;
};

/// Bit-parallel LCS length (Allison-Dix). Column sequence `a` is packed into
/// 64-bit words; `b` streams through. After the scan, LCS = number of zero
/// bits among the first |a| positions.
inline size_t lcs_length_bitparallel(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() || b.empty()) return 0;
    const size_t m = a.size();
    const size_t words = (m + 63) / 64;

    std::unordered_map<int, std::vector<uint64_t>> match;
    match.reserve(m);
    for (size_t i = 0; i < m; ++i) {
        auto& mask = match.try_emplace(a[i], std::vector<uint64_t>(words, 0)).first->second;
        mask[i / 64] |= uint64_t{1} << (i % 64);
    }

    std::vector<uint64_t> v(words, ~uint64_t{0});
    std::vector<uint64_t> u(words), sum(words);
    const std::vector<uint64_t> zero(words, 0);
    for (int c : b) {
        auto it = match.find(c);
        const std::vector<uint64_t>& mc = (it == match.end()) ? zero : it->second;
        uint64_t carry = 0;
        for (size_t w = 0; w < words; ++w) {
            u[w] = v[w] & mc[w];
            uint64_t s = v[w] + u[w];
            uint64_t c1 = s < v[w] ? 1 : 0;
            uint64_t s2 = s + carry;
            uint64_t c2 = s2 < s ? 1 : 0;
            sum[w] = s2;
            carry = c1 | c2;
        }
        for (size_t w = 0; w < words; ++w) v[w] = sum[w] | (v[w] & ~mc[w]);
    }

    size_t zeros = 0;
    for (size_t w = 0; w < words; ++w) {
        uint64_t bits = ~v[w];
        if (w == words - 1 && m % 64 != 0) bits &= (uint64_t{1} << (m % 64)) - 1;
        zeros += static_cast<size_t>(__builtin_popcountll(bits));
    }
    return zeros;
}

}  // namespace detail

/// Length of the longest contiguous token run occurring in both sequences.
/// The "at least N direct tokens" rule is evaluated against this value.
inline size_t longest_common_run(const TokenSeq& a, const TokenSeq& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<int> ia, ib;
    detail::intern_tokens(a, b, ia, ib);
    // Build the automaton over the shorter side; stream the longer one.
    if (ia.size() <= ib.size()) {
        return detail::SuffixAutomaton(ia).longest_common_factor(ib);
    }
    return detail::SuffixAutomaton(ib).longest_common_factor(ia);
}

/// Length of the longest (non-contiguous) common subsequence.
inline size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
    if (a.empty() || b.empty()) return 0;
    std::vector<int> ia, ib;
    detail::intern_tokens(a, b, ia, ib);
    if (ia.size() <= ib.size()) return detail::lcs_length_bitparallel(ia, ib);
    return detail::lcs_length_bitparallel(ib, ia);
}

/// ROUGE-L with beta = 1: precision = LCS/|candidate|, recall = LCS/|reference|,
/// f1 = 2PR/(P+R). Terms with a zero denominator evaluate to 0.
inline RougeScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
    RougeScore s;
    const size_t l = lcs_length(candidate, reference);
    if (!candidate.empty()) s.precision = static_cast<double>(l) / candidate.size();
    if (!reference.empty()) s.recall = static_cast<double>(l) / reference.size();
    if (s.precision + s.recall > 0.0)
        s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

}  // namespace ragleak
