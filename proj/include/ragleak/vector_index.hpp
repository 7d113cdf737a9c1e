#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "ragleak/corpus.hpp"
#include "ragleak/embedding.hpp"

namespace ragleak {

static_assert(std::endian::native == std::endian::little,
              "index sidecar format assumes a little-endian host");

struct RetrieverConfig {
    size_t k = 2;
    Metric metric = Metric::l2;
    double threshold = std::numeric_limits<double>::infinity();

    void validate() const {
        if (k < 1) throw Error("retriever k must be >= 1");
        if (!(threshold > 0.0)) throw Error("retriever threshold must be > 0");
    }
};

struct RetrievalHit {
    std::string piece_id;
    double distance = 0.0;
};

/// Hits sorted by ascending distance (ties by ascending piece id); at most k
/// entries, every distance strictly below the threshold.
struct RetrievalResult {
    std::vector<RetrievalHit> hits;
    std::string query_id;
};

/// Exact k-NN index over piece embeddings. Linear scan on purpose: audit
/// corpora are small enough that exactness beats ANN here, and the
/// monotonicity properties the harness relies on need exact results.
/// Immutable once built; concurrent retrieve calls are safe.
class VectorIndex {
public:
    VectorIndex() = default;

    static VectorIndex build(const Corpus& corpus, const EmbeddingBackend& backend,
                             size_t max_in_flight = 8) {
        if (corpus.empty()) throw Error("cannot index an empty corpus");
        VectorIndex idx;
        idx.dim_ = backend.dim();
        idx.model_id_ = backend.model_id();
        idx.ids_.reserve(corpus.size());
        for (const auto& p : corpus.pieces()) idx.ids_.push_back(p.id);
        idx.data_.assign(corpus.size() * idx.dim_, 0.0f);

        const size_t n = corpus.size();
        const size_t batch = 32;
        const size_t n_batches = (n + batch - 1) / batch;
        const size_t n_threads = std::max<size_t>(1, std::min(max_in_flight, n_batches));

        std::vector<std::string> errors(n_threads);
        std::atomic<size_t> next{0};
        auto worker = [&](size_t tid) {
            try {
                for (;;) {
                    size_t b = next.fetch_add(1);
                    if (b >= n_batches) return;
                    size_t lo = b * batch, hi = std::min(lo + batch, n);
                    std::vector<std::string> texts;
                    texts.reserve(hi - lo);
                    for (size_t i = lo; i < hi; ++i)
                        texts.push_back(corpus.pieces()[i].text);
                    auto vecs = backend.embed_batch(texts);
                    if (vecs.size() != texts.size())
                        throw Error("backend returned wrong batch size");
                    for (size_t i = lo; i < hi; ++i) {
                        const auto& v = vecs[i - lo];
                        if (v.dim() != idx.dim_)
                            throw Error("embedding dim mismatch for piece " + idx.ids_[i]);
                        for (size_t d = 0; d < idx.dim_; ++d) {
                            double x = v.values[d];
                            if (!std::isfinite(x))
                                throw Error("non-finite embedding for piece " + idx.ids_[i]);
                            idx.data_[i * idx.dim_ + d] = static_cast<float>(x);
                        }
                    }
                }
            } catch (const std::exception& e) {
                errors[tid] = e.what();
            }
        };

        if (n_threads == 1) {
            worker(0);
        } else {
            std::vector<std::thread> threads;
            for (size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker, t);
            for (auto& t : threads) t.join();
        }
        for (const auto& e : errors)
            if (!e.empty()) throw Error("index build failed: " + e);
        return idx;
    }

    size_t size() const { return ids_.size(); }
    size_t dim() const { return dim_; }
    const std::string& model_id() const { return model_id_; }
    const std::vector<std::string>& ids() const { return ids_; }

    std::vector<double> row(size_t i) const {
        std::vector<double> out(dim_);
        for (size_t d = 0; d < dim_; ++d) out[d] = data_[i * dim_ + d];
        return out;
    }

    /// Exact top-k under cfg.metric with distances strictly below
    /// cfg.threshold; ties broken by ascending piece id.
    RetrievalResult retrieve_vector(const EmbeddingVector& query,
                                    const RetrieverConfig& cfg,
                                    std::string query_id = {}) const {
        cfg.validate();
        if (query.dim() != dim_)
            throw Error("query dim " + std::to_string(query.dim()) +
                        " does not match index dim " + std::to_string(dim_));
        if (!query.model_id.empty() && query.model_id != model_id_)
            throw Error("query embedded with model '" + query.model_id +
                        "' but index uses '" + model_id_ + "'");

        std::vector<std::pair<double, size_t>> candidates;
        std::vector<double> r(dim_);
        for (size_t i = 0; i < ids_.size(); ++i) {
            for (size_t d = 0; d < dim_; ++d) r[d] = data_[i * dim_ + d];
            double dist = distance(std::span<const double>(query.values),
                                   std::span<const double>(r), cfg.metric);
            if (dist < cfg.threshold) candidates.emplace_back(dist, i);
        }
        auto cmp = [this](const std::pair<double, size_t>& a,
                          const std::pair<double, size_t>& b) {
            if (a.first != b.first) return a.first < b.first;
            return ids_[a.second] < ids_[b.second];
        };
        size_t keep = std::min(cfg.k, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + keep,
                          candidates.end(), cmp);
        candidates.resize(keep);

        RetrievalResult result;
        result.query_id = std::move(query_id);
        result.hits.reserve(keep);
        for (const auto& [dist, i] : candidates) result.hits.push_back({ids_[i], dist});
        return result;
    }

    RetrievalResult retrieve(const std::string& query, const RetrieverConfig& cfg,
                             const EmbeddingBackend& backend,
                             std::string query_id = {}) const {
        return retrieve_vector(backend.embed(query), cfg, std::move(query_id));
    }

    /// Sidecar layout: magic "RLPIDX1", u32 dim, u64 count, u32+bytes
    /// model_id, count*dim float32 rows, then per-row u32+bytes ids. All
    /// integers little-endian. Serialization is bit-stable across rebuilds
    /// with a deterministic backend.
    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write index file: " + path);
        out.write(kMagic, 7);
        write_u32(out, static_cast<uint32_t>(dim_));
        write_u64(out, static_cast<uint64_t>(ids_.size()));
        write_u32(out, static_cast<uint32_t>(model_id_.size()));
        out.write(model_id_.data(), static_cast<std::streamsize>(model_id_.size()));
        out.write(reinterpret_cast<const char*>(data_.data()),
                  static_cast<std::streamsize>(data_.size() * sizeof(float)));
        for (const auto& id : ids_) {
            write_u32(out, static_cast<uint32_t>(id.size()));
            out.write(id.data(), static_cast<std::streamsize>(id.size()));
        }
        if (!out) throw Error("short write to index file: " + path);
    }

    static VectorIndex load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open index file: " + path);
        char magic[7];
        in.read(magic, 7);
        if (!in || std::memcmp(magic, kMagic, 7) != 0)
            throw Error("bad index magic in " + path);
        VectorIndex idx;
        idx.dim_ = read_u32(in);
        uint64_t count = read_u64(in);
        uint32_t mlen = read_u32(in);
        idx.model_id_.resize(mlen);
        in.read(idx.model_id_.data(), mlen);
        idx.data_.resize(count * idx.dim_);
        in.read(reinterpret_cast<char*>(idx.data_.data()),
                static_cast<std::streamsize>(idx.data_.size() * sizeof(float)));
        idx.ids_.reserve(count);
        for (uint64_t i = 0; i < count; ++i) {
            uint32_t len = read_u32(in);
            std::string id(len, '\0');
            in.read(id.data(), len);
            idx.ids_.push_back(std::move(id));
        }
        if (!in) throw Error("truncated index file: " + path);
        return idx;
    }

private:
    static constexpr const char* kMagic = "RLPIDX1";

    static void write_u32(std::ofstream& out, uint32_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    static void write_u64(std::ofstream& out, uint64_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    static uint32_t read_u32(std::ifstream& in) {
        uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        return v;
    }
    static uint64_t read_u64(std::ifstream& in) {
        uint64_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        return v;
    }

    size_t dim_ = 0;
    std::string model_id_;
    std::vector<float> data_;
    std::vector<std::string> ids_;
};

}  // namespace ragleak
