#include "ragleak/tokenizer.hpp"

#include <gtest/gtest.h>

using namespace ragleak;

TEST(Tokenizer, LowercasesAndStripsPunctuation) {
    EXPECT_EQ(tokenize("Hello,  World!"), (TokenSeq{"hello", "world"}));
}

TEST(Tokenizer, EmptyInput) {
    EXPECT_TRUE(tokenize("").empty());
    EXPECT_TRUE(tokenize("   \t\n").empty());
}

TEST(Tokenizer, InnerPunctuationPreserved) {
    EXPECT_EQ(tokenize("a-b c"), (TokenSeq{"a-b", "c"}));
    EXPECT_EQ(tokenize("don't stop"), (TokenSeq{"don't", "stop"}));
    EXPECT_EQ(tokenize("713-420-3227 (work)"), (TokenSeq{"713-420-3227", "work"}));
}

TEST(Tokenizer, PurePunctuationTokensDropped) {
    EXPECT_EQ(tokenize("a --- b ..."), (TokenSeq{"a", "b"}));
}

TEST(Tokenizer, TemplateMarkers) {
    EXPECT_EQ(tokenize("input: Hi\noutput: Bye"), (TokenSeq{"input", "hi", "output", "bye"}));
}

TEST(Tokenizer, JoinRoundTrip) {
    // Canonical tokens re-tokenize to themselves.
    TokenSeq toks = tokenize("The quick, brown fox -- jumped over 3.5 logs!");
    EXPECT_EQ(tokenize(join_tokens(toks)), toks);
}

TEST(Tokenizer, TokenCountMatches) {
    EXPECT_EQ(token_count("one two three"), 3u);
    EXPECT_EQ(token_count(""), 0u);
}
