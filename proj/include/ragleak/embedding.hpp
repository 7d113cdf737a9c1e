#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ragleak/corpus.hpp"
#include "ragleak/tokenizer.hpp"

namespace ragleak {

enum class Metric { l2, cosine_distance };

inline const char* metric_name(Metric m) {
    return m == Metric::l2 ? "l2" : "cosine";
}

inline Metric metric_from_name(const std::string& s) {
    if (s == "l2") return Metric::l2;
    if (s == "cosine" || s == "cosine_distance") return Metric::cosine_distance;
    throw Error("unknown metric: " + s);
}

struct EmbeddingVector {
    std::vector<double> values;
    std::string model_id;

    size_t dim() const { return values.size(); }
};

/// l2: Euclidean norm of (a-b). cosine_distance: 1 - cos(a,b), clamped to
/// [0,2]; zero vectors are rejected under cosine.
inline double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
    if (a.size() != b.size())
        throw Error("embedding dim mismatch: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
    if (metric == Metric::l2) {
        double acc = 0.0;
        for (size_t i = 0; i < a.size(); ++i) {
            double d = a[i] - b[i];
            acc += d * d;
        }
        return std::sqrt(acc);
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw Error("cosine distance undefined for zero vector");
    double d = 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
    return std::min(2.0, std::max(0.0, d));
}

inline double distance(const EmbeddingVector& a, const EmbeddingVector& b, Metric metric) {
    return distance(std::span<const double>(a.values), std::span<const double>(b.values),
                    metric);
}

/// Embedding backend handle. Implementations must be safe for concurrent
/// embed calls; index construction fans batches across threads.
class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual const std::string& model_id() const = 0;
    virtual size_t dim() const = 0;
    virtual EmbeddingVector embed(const std::string& text) const = 0;

    virtual std::vector<EmbeddingVector> embed_batch(
        std::span<const std::string> texts) const {
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto& t : texts) out.push_back(embed(t));
        return out;
    }
};

namespace detail {

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace detail

/// Deterministic offline embedder: a 256-dim hashed token-bigram frequency
/// vector, L2-normalized. Shared token bigrams pull texts together, which is
/// enough locality for offline retrieval tests without any model dependency.
class LocalBigramEmbedder final : public EmbeddingBackend {
public:
    static constexpr size_t kDim = 256;

    const std::string& model_id() const override {
        static const std::string id = "local-bigram-256";
        return id;
    }
    size_t dim() const override { return kDim; }

    EmbeddingVector embed(const std::string& text) const override {
        if (text.empty()) throw Error("cannot embed empty text");
        TokenSeq tokens = tokenize(text);
        if (tokens.empty()) tokens.push_back(text);

        std::vector<double> counts(kDim, 0.0);
        std::string prev = "\x02";  // sequence-start marker
        for (const auto& tok : tokens) {
            counts[bigram_bucket(prev, tok)] += 1.0;
            prev = tok;
        }
        counts[bigram_bucket(prev, "\x03")] += 1.0;

        double norm = 0.0;
        for (double v : counts) norm += v * v;
        norm = std::sqrt(norm);
        for (double& v : counts) v /= norm;
        return {std::move(counts), model_id()};
    }

private:
    static size_t bigram_bucket(std::string_view a, std::string_view b) {
        uint64_t h = detail::fnv1a64(a);
        h = detail::fnv1a64("\x1f", h);
        h = detail::fnv1a64(b, h);
        return static_cast<size_t>(h % kDim);
    }
};

/// Test embedder mapping registered texts to fixed points.
class StubEmbedder final : public EmbeddingBackend {
public:
    explicit StubEmbedder(size_t dim, std::string model = "stub")
        : dim_(dim), model_(std::move(model)) {}

    void set_point(const std::string& text, std::vector<double> values) {
        if (values.size() != dim_) throw Error("stub point dim mismatch");
        points_[text] = std::move(values);
    }

    const std::string& model_id() const override { return model_; }
    size_t dim() const override { return dim_; }

    EmbeddingVector embed(const std::string& text) const override {
        auto it = points_.find(text);
        if (it == points_.end()) throw Error("stub embedder has no point for: " + text);
        return {it->second, model_};
    }

private:
    size_t dim_;
    std::string model_;
    std::map<std::string, std::vector<double>> points_;
};

}  // namespace ragleak
