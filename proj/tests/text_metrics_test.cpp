#include "ragleak/text_metrics.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "ragleak/rng.hpp"

using namespace ragleak;

namespace {

// Independent quadratic DP oracles. These deliberately share no code with the
// kernels under test.

size_t oracle_longest_common_run(const TokenSeq& a, const TokenSeq& b) {
    size_t best = 0;
    std::vector<std::vector<size_t>> dp(a.size() + 1, std::vector<size_t>(b.size() + 1, 0));
    for (size_t i = 1; i <= a.size(); ++i)
        for (size_t j = 1; j <= b.size(); ++j)
            if (a[i - 1] == b[j - 1]) {
                dp[i][j] = dp[i - 1][j - 1] + 1;
                best = std::max(best, dp[i][j]);
            }
    return best;
}

size_t oracle_lcs(const TokenSeq& a, const TokenSeq& b) {
    std::vector<std::vector<size_t>> dp(a.size() + 1, std::vector<size_t>(b.size() + 1, 0));
    for (size_t i = 1; i <= a.size(); ++i)
        for (size_t j = 1; j <= b.size(); ++j)
            dp[i][j] = a[i - 1] == b[j - 1]
                           ? dp[i - 1][j - 1] + 1
                           : std::max(dp[i - 1][j], dp[i][j - 1]);
    return dp[a.size()][b.size()];
}

TokenSeq random_tokens(Rng& rng, size_t max_len, size_t vocab) {
    TokenSeq out;
    size_t len = rng.bounded(max_len + 1);
    for (size_t i = 0; i < len; ++i)
        out.push_back("t" + std::to_string(rng.bounded(vocab)));
    return out;
}

bool is_window_of(const TokenSeq& needle, const TokenSeq& hay) {
    if (needle.size() > hay.size()) return false;
    for (size_t s = 0; s + needle.size() <= hay.size(); ++s) {
        bool ok = true;
        for (size_t i = 0; i < needle.size(); ++i)
            if (hay[s + i] != needle[i]) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

}  // namespace

TEST(LongestCommonRun, Identity) {
    TokenSeq x = {"a", "b", "c", "d"};
    EXPECT_EQ(longest_common_run(x, x), x.size());
}

TEST(LongestCommonRun, SpecExample) {
    TokenSeq a = {"p", "q", "r", "s", "t"};
    TokenSeq b = {"x", "q", "r", "s", "y"};
    EXPECT_EQ(longest_common_run(a, b), 3u);
    EXPECT_EQ(oracle_longest_common_run(a, b), 3u);
}

TEST(LongestCommonRun, DisjointAndEmpty) {
    EXPECT_EQ(longest_common_run({"a", "b"}, {"c", "d"}), 0u);
    EXPECT_EQ(longest_common_run({}, {"a"}), 0u);
    EXPECT_EQ(longest_common_run({"a"}, {}), 0u);
}

TEST(LongestCommonRun, MatchesOracleOnRandomPairs) {
    Rng rng(101);
    for (int iter = 0; iter < 1500; ++iter) {
        size_t vocab = 2 + rng.bounded(12);  // small vocab forces long overlaps
        TokenSeq a = random_tokens(rng, 80, vocab);
        TokenSeq b = random_tokens(rng, 80, vocab);
        ASSERT_EQ(longest_common_run(a, b), oracle_longest_common_run(a, b))
            << "iter " << iter;
    }
}

TEST(LongestCommonRun, BoundedByShorterAndWindowEquality) {
    Rng rng(202);
    for (int iter = 0; iter < 500; ++iter) {
        TokenSeq a = random_tokens(rng, 30, 6);
        TokenSeq b = random_tokens(rng, 30, 6);
        size_t run = longest_common_run(a, b);
        size_t lo = std::min(a.size(), b.size());
        EXPECT_LE(run, lo);
        if (run == lo && lo > 0) {
            const TokenSeq& shorter = a.size() <= b.size() ? a : b;
            const TokenSeq& longer = a.size() <= b.size() ? b : a;
            EXPECT_TRUE(is_window_of(shorter, longer));
        }
    }
    // Construction direction: a window of a sequence always reaches the bound.
    for (int iter = 0; iter < 200; ++iter) {
        TokenSeq hay = random_tokens(rng, 40, 8);
        if (hay.size() < 2) continue;
        size_t len = 1 + rng.bounded(hay.size());
        size_t start = rng.bounded(hay.size() - len + 1);
        TokenSeq window(hay.begin() + start, hay.begin() + start + len);
        EXPECT_EQ(longest_common_run(window, hay), window.size());
    }
}

TEST(RougeL, IdenticalSequences) {
    TokenSeq x = {"a", "b", "c"};
    RougeScore s = rouge_l(x, x);
    EXPECT_DOUBLE_EQ(s.precision, 1.0);
    EXPECT_DOUBLE_EQ(s.recall, 1.0);
    EXPECT_DOUBLE_EQ(s.f1, 1.0);
}

TEST(RougeL, DisjointSequences) {
    EXPECT_DOUBLE_EQ(rouge_l({"a", "b"}, {"c", "d"}).f1, 0.0);
}

TEST(RougeL, EmptySides) {
    RougeScore s = rouge_l({}, {"a"});
    EXPECT_DOUBLE_EQ(s.precision, 0.0);
    EXPECT_DOUBLE_EQ(s.recall, 0.0);
    EXPECT_DOUBLE_EQ(s.f1, 0.0);
    EXPECT_DOUBLE_EQ(rouge_l({"a"}, {}).f1, 0.0);
}

TEST(RougeL, SpecExample) {
    // LCS("the cat on mat", "the cat sat on the mat") = 4.
    TokenSeq cand = {"the", "cat", "on", "mat"};
    TokenSeq ref = {"the", "cat", "sat", "on", "the", "mat"};
    ASSERT_EQ(oracle_lcs(cand, ref), 4u);
    RougeScore s = rouge_l(cand, ref);
    EXPECT_NEAR(s.precision, 1.0, 1e-12);
    EXPECT_NEAR(s.recall, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(s.f1, 0.8, 1e-12);
}

TEST(RougeL, MatchesOracleOnRandomPairs) {
    Rng rng(303);
    for (int iter = 0; iter < 1500; ++iter) {
        size_t vocab = 2 + rng.bounded(12);
        TokenSeq a = random_tokens(rng, 80, vocab);
        TokenSeq b = random_tokens(rng, 80, vocab);
        ASSERT_EQ(lcs_length(a, b), oracle_lcs(a, b)) << "iter " << iter;
    }
}

TEST(RougeL, SymmetricUnderSwap) {
    Rng rng(404);
    for (int iter = 0; iter < 1000; ++iter) {
        TokenSeq a = random_tokens(rng, 40, 8);
        TokenSeq b = random_tokens(rng, 40, 8);
        RougeScore ab = rouge_l(a, b);
        RougeScore ba = rouge_l(b, a);
        EXPECT_DOUBLE_EQ(ab.f1, ba.f1);
        EXPECT_DOUBLE_EQ(ab.precision, ba.recall);
        EXPECT_DOUBLE_EQ(ab.recall, ba.precision);
    }
}

TEST(RougeL, LongSequencesCrossWordBoundary) {
    // Exercise the multi-word bit-vector path (> 64 and > 128 positions).
    Rng rng(505);
    for (int iter = 0; iter < 60; ++iter) {
        TokenSeq a = random_tokens(rng, 200, 10);
        TokenSeq b = random_tokens(rng, 200, 10);
        ASSERT_EQ(lcs_length(a, b), oracle_lcs(a, b));
        ASSERT_EQ(longest_common_run(a, b), oracle_longest_common_run(a, b));
    }
}
