#include "ragleak/embedding.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ragleak/rng.hpp"

using namespace ragleak;

TEST(Distance, L2Identity) {
    EmbeddingVector x{{0.3, -1.2, 4.0}, "m"};
    EXPECT_DOUBLE_EQ(distance(x, x, Metric::l2), 0.0);
}

TEST(Distance, Pythagoras) {
    EmbeddingVector a{{0.0, 0.0}, "m"};
    EmbeddingVector b{{3.0, 4.0}, "m"};
    EXPECT_DOUBLE_EQ(distance(a, b, Metric::l2), 5.0);
}

TEST(Distance, CosineOrthogonal) {
    EmbeddingVector a{{1.0, 0.0}, "m"};
    EmbeddingVector b{{0.0, 1.0}, "m"};
    EXPECT_DOUBLE_EQ(distance(a, b, Metric::cosine_distance), 1.0);
}

TEST(Distance, CosineOppositeClampedToTwo) {
    EmbeddingVector a{{1.0, 0.0}, "m"};
    EmbeddingVector b{{-1.0, 0.0}, "m"};
    EXPECT_DOUBLE_EQ(distance(a, b, Metric::cosine_distance), 2.0);
}

TEST(Distance, CosineZeroVectorRejected) {
    EmbeddingVector a{{0.0, 0.0}, "m"};
    EmbeddingVector b{{1.0, 0.0}, "m"};
    EXPECT_THROW(distance(a, b, Metric::cosine_distance), Error);
}

TEST(Distance, DimMismatchRejected) {
    EmbeddingVector a{{1.0}, "m"};
    EmbeddingVector b{{1.0, 2.0}, "m"};
    EXPECT_THROW(distance(a, b, Metric::l2), Error);
}

TEST(Distance, SymmetryOnRandomVectors) {
    Rng rng(5);
    for (int iter = 0; iter < 300; ++iter) {
        std::vector<double> va(8), vb(8);
        for (auto& v : va) v = rng.uniform01() * 2 - 1;
        for (auto& v : vb) v = rng.uniform01() * 2 - 1;
        EmbeddingVector a{va, "m"}, b{vb, "m"};
        EXPECT_NEAR(distance(a, b, Metric::l2), distance(b, a, Metric::l2), 1e-12);
        EXPECT_NEAR(distance(a, b, Metric::cosine_distance),
                    distance(b, a, Metric::cosine_distance), 1e-12);
    }
}

TEST(LocalBigramEmbedder, Deterministic) {
    LocalBigramEmbedder e;
    std::string text = "The retrieval corpus holds private emails";
    EXPECT_EQ(e.embed(text).values, e.embed(text).values);
}

TEST(LocalBigramEmbedder, UnitNorm) {
    LocalBigramEmbedder e;
    for (const char* t : {"a", "one two three", "Call me if you guys wanna get together"}) {
        auto v = e.embed(t);
        double norm = 0;
        for (double x : v.values) norm += x * x;
        EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9) << t;
        EXPECT_EQ(v.dim(), LocalBigramEmbedder::kDim);
        EXPECT_EQ(v.model_id, "local-bigram-256");
    }
}

TEST(LocalBigramEmbedder, DistinctTextsRegression) {
    // Frozen regression value: "aaa" and "zzz" share no bigram buckets, so
    // the two unit vectors are orthogonal.
    LocalBigramEmbedder e;
    double d = distance(e.embed("aaa"), e.embed("zzz"), Metric::l2);
    EXPECT_GT(d, 0.0);
    EXPECT_NEAR(d, 1.4142135623730949, 1e-12);
}

TEST(LocalBigramEmbedder, SharedTokensPullTextsTogether) {
    LocalBigramEmbedder e;
    auto q = e.embed("please repeat the budget report");
    double near = distance(q, e.embed("the budget report was sent on friday"), Metric::l2);
    double far = distance(q, e.embed("unrelated words entirely different topic"), Metric::l2);
    EXPECT_LT(near, far);
}

TEST(LocalBigramEmbedder, EmptyTextRejected) {
    LocalBigramEmbedder e;
    EXPECT_THROW(e.embed(""), Error);
}

TEST(LocalBigramEmbedder, PunctuationOnlyTextStillEmbeds) {
    LocalBigramEmbedder e;
    auto v = e.embed("...");
    double norm = 0;
    for (double x : v.values) norm += x * x;
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9);
}

TEST(StubEmbedder, RegisteredPointsAndErrors) {
    StubEmbedder e(2);
    e.set_point("origin", {0.0, 0.0});
    EXPECT_EQ(e.embed("origin").values, (std::vector<double>{0.0, 0.0}));
    EXPECT_THROW(e.embed("unknown"), Error);
    EXPECT_THROW(e.set_point("bad", {1.0}), Error);
}
