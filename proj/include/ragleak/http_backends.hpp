#pragma once

#include <chrono>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "ragleak/cache.hpp"
#include "ragleak/embedding.hpp"
#include "ragleak/error.hpp"
#include "ragleak/llm_backends.hpp"

namespace ragleak {

struct BackendOptions {
    int max_attempts = 3;
    int backoff_base_ms = 100;  // doubles per retry, capped
    int backoff_cap_ms = 2000;
    int timeout_sec = 60;
};

namespace detail {

struct ParsedEndpoint {
    std::string host;  // scheme://host[:port]
    std::string path;  // /v1/...
};

inline ParsedEndpoint parse_endpoint(const std::string& url) {
    size_t scheme = url.find("://");
    if (scheme == std::string::npos) throw Error("endpoint URL needs a scheme: " + url);
    size_t slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) return {url, "/"};
    return {url.substr(0, slash), url.substr(slash)};
}

inline std::string bearer_from_env(const char* env_var) {
    const char* v = env_var ? std::getenv(env_var) : nullptr;
    return v ? v : "";
}

/// POST JSON with bounded retries and exponential backoff, optionally backed
/// by the response cache. Cache hits return the stored body byte-identically
/// and never touch the network.
inline nlohmann::json cached_post_json(const std::string& endpoint, const nlohmann::json& body,
                                       const char* key_env, const BackendOptions& opts,
                                       ResponseCache* cache) {
    const std::string payload = body.dump();
    const std::string cache_key =
        cache ? ResponseCache::key_for(endpoint + "|" + payload) : std::string();
    if (cache) {
        if (auto hit = cache->lookup(cache_key)) {
            try {
                return nlohmann::json::parse(*hit);
            } catch (const std::exception&) {
                // Corrupt entry: fall through and re-fetch.
            }
        }
    }

    ParsedEndpoint ep = parse_endpoint(endpoint);
    std::string last_error;
    int backoff = opts.backoff_base_ms;
    for (int attempt = 1; attempt <= opts.max_attempts; ++attempt) {
        httplib::Client cli(ep.host);
        cli.set_connection_timeout(opts.timeout_sec, 0);
        cli.set_read_timeout(opts.timeout_sec, 0);
        httplib::Headers headers;
        std::string key = bearer_from_env(key_env);
        if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

        auto res = cli.Post(ep.path, headers, payload, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            nlohmann::json parsed;
            try {
                parsed = nlohmann::json::parse(res->body);
            } catch (const std::exception& e) {
                throw BackendError("backend returned non-JSON body: " + std::string(e.what()),
                                   res->status, false);
            }
            if (cache) cache->store(cache_key, res->body);
            return parsed;
        }
        int status = res ? res->status : 0;
        bool retryable = !res || status == 429 || status >= 500;
        last_error = res ? ("HTTP " + std::to_string(status) + " from " + endpoint)
                         : ("transport failure talking to " + endpoint);
        if (!retryable) throw BackendError(last_error, status, false);
        if (attempt < opts.max_attempts) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
            backoff = std::min(backoff * 2, opts.backoff_cap_ms);
        }
    }
    throw BackendError(last_error + " after " + std::to_string(opts.max_attempts) +
                           " attempts",
                       0, true);
}

}  // namespace detail

/// OpenAI-compatible embedding client: POST {"model","input":[...]} and read
/// {"data":[{"embedding":[...]},...]}. API key from EMBED_API_KEY.
class HttpEmbeddingBackend final : public EmbeddingBackend {
public:
    HttpEmbeddingBackend(std::string endpoint, std::string model,
                         BackendOptions opts = {}, ResponseCache* cache = nullptr)
        : endpoint_(std::move(endpoint)), model_(std::move(model)), opts_(opts),
          cache_(cache) {}

    const std::string& model_id() const override { return model_; }

    size_t dim() const override {
        std::call_once(dim_once_, [this]() {
            dim_ = embed_batch_impl({"dimension probe"}).at(0).dim();
        });
        return dim_;
    }

    EmbeddingVector embed(const std::string& text) const override {
        if (text.empty()) throw Error("cannot embed empty text");
        return embed_batch_impl({text}).at(0);
    }

    std::vector<EmbeddingVector> embed_batch(
        std::span<const std::string> texts) const override {
        std::vector<std::string> batch(texts.begin(), texts.end());
        return embed_batch_impl(batch);
    }

private:
    std::vector<EmbeddingVector> embed_batch_impl(const std::vector<std::string>& texts) const {
        nlohmann::json body;
        body["model"] = model_;
        body["input"] = texts;
        nlohmann::json res =
            detail::cached_post_json(endpoint_, body, "EMBED_API_KEY", opts_, cache_);
        if (!res.contains("data") || !res["data"].is_array() ||
            res["data"].size() != texts.size())
            throw BackendError("embedding response shape mismatch from " + endpoint_, 200,
                               false);
        // Respect the index field when present; fall back to array order.
        std::vector<EmbeddingVector> out(texts.size());
        size_t pos = 0;
        for (const auto& item : res["data"]) {
            size_t idx = item.contains("index") ? item["index"].get<size_t>() : pos;
            if (idx >= out.size())
                throw BackendError("embedding index out of range from " + endpoint_, 200,
                                   false);
            EmbeddingVector v;
            v.model_id = model_;
            for (const auto& x : item.at("embedding")) v.values.push_back(x.get<double>());
            out[idx] = std::move(v);
            ++pos;
        }
        return out;
    }

    std::string endpoint_;
    std::string model_;
    BackendOptions opts_;
    ResponseCache* cache_;
    mutable std::once_flag dim_once_;
    mutable size_t dim_ = 0;
};

/// OpenAI-chat-compatible generation client. API key from LLM_API_KEY.
class HttpChatLlm final : public LlmBackend {
public:
    explicit HttpChatLlm(std::string endpoint, BackendOptions opts = {},
                         ResponseCache* cache = nullptr)
        : endpoint_(std::move(endpoint)), opts_(opts), cache_(cache) {}

    const std::string& id() const override { return endpoint_; }

    GenerationOutput generate(const std::string& prompt,
                              const GenerationParams& params) const override {
        nlohmann::json body;
        body["model"] = params.model_id;
        body["messages"] = nlohmann::json::array(
            {nlohmann::json{{"role", "user"}, {"content", prompt}}});
        body["temperature"] = params.temperature;
        body["max_tokens"] = params.max_tokens;
        body["logprobs"] = params.want_logprobs;
        nlohmann::json res =
            detail::cached_post_json(endpoint_, body, "LLM_API_KEY", opts_, cache_);

        GenerationOutput out;
        if (!res.contains("choices") || res["choices"].empty()) return out;
        const auto& choice = res["choices"][0];
        if (choice.contains("message") && choice["message"].contains("content") &&
            choice["message"]["content"].is_string())
            out.text = choice["message"]["content"].get<std::string>();
        if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
            choice["logprobs"].contains("content")) {
            for (const auto& t : choice["logprobs"]["content"])
                out.token_logprobs.push_back(
                    {t.value("token", ""), t.value("logprob", 0.0)});
        }
        return out;
    }

private:
    std::string endpoint_;
    BackendOptions opts_;
    ResponseCache* cache_;
};

/// Reranker client: POST {"query","documents":[...]} and read {"scores":[...]}.
/// API key from RERANK_API_KEY.
class HttpRerankBackend final : public RerankBackend {
public:
    explicit HttpRerankBackend(std::string endpoint, BackendOptions opts = {},
                               ResponseCache* cache = nullptr)
        : endpoint_(std::move(endpoint)), opts_(opts), cache_(cache) {}

    const std::string& id() const override { return endpoint_; }

    std::vector<double> score(const std::string& query,
                              std::span<const std::string> documents) const override {
        nlohmann::json body;
        body["query"] = query;
        body["documents"] = std::vector<std::string>(documents.begin(), documents.end());
        nlohmann::json res =
            detail::cached_post_json(endpoint_, body, "RERANK_API_KEY", opts_, cache_);
        if (!res.contains("scores") || res["scores"].size() != documents.size())
            throw BackendError("reranker response shape mismatch from " + endpoint_, 200,
                               false);
        std::vector<double> scores;
        for (const auto& s : res["scores"]) scores.push_back(s.get<double>());
        return scores;
    }

private:
    std::string endpoint_;
    BackendOptions opts_;
    ResponseCache* cache_;
};

/// Backend factories keyed by URL scheme: "local" for the bundled offline
/// implementations, "mock://<behavior>" for scripted LLMs, http(s):// for
/// live endpoints. Mock and local backends bypass the cache.
inline std::shared_ptr<EmbeddingBackend> make_embedding_backend(
    const std::string& spec, const std::string& model = "", BackendOptions opts = {},
    ResponseCache* cache = nullptr) {
    if (spec.empty() || spec == "local" || spec == "local://bigram")
        return std::make_shared<LocalBigramEmbedder>();
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
        return std::make_shared<HttpEmbeddingBackend>(
            spec, model.empty() ? "bge-large-en-v1.5" : model, opts, cache);
    throw Error("unknown embedding backend: " + spec);
}

inline std::shared_ptr<LlmBackend> make_llm_backend(const std::string& spec,
                                                    BackendOptions opts = {},
                                                    ResponseCache* cache = nullptr) {
    if (spec.rfind("mock://", 0) == 0) return make_mock_llm(spec.substr(7));
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
        return std::make_shared<HttpChatLlm>(spec, opts, cache);
    throw Error("unknown LLM backend: " + spec);
}

inline std::shared_ptr<RerankBackend> make_rerank_backend(const std::string& spec,
                                                          BackendOptions opts = {},
                                                          ResponseCache* cache = nullptr) {
    if (spec.empty() || spec == "local") return std::make_shared<LocalRougeReranker>();
    if (spec.rfind("http://", 0) == 0 || spec.rfind("https://", 0) == 0)
        return std::make_shared<HttpRerankBackend>(spec, opts, cache);
    throw Error("unknown reranker backend: " + spec);
}

}  // namespace ragleak
