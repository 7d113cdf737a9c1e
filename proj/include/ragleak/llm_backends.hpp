#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ragleak/error.hpp"
#include "ragleak/prompts.hpp"
#include "ragleak/text_metrics.hpp"
#include "ragleak/tokenizer.hpp"

namespace ragleak {

struct GenerationParams {
    double temperature = 0.0;  // 0 = greedy
    size_t max_tokens = 512;
    std::string model_id = "mock";
    bool want_logprobs = false;

    void validate() const {
        if (temperature < 0.0 || temperature > 2.0)
            throw Error("temperature must be in [0,2]");
        if (max_tokens == 0) throw Error("max_tokens must be positive");
    }
};

struct TokenLogprob {
    std::string token;
    double logprob = 0.0;  // ln-probability, <= 0
};

struct GenerationOutput {
    std::string text;
    std::vector<TokenLogprob> token_logprobs;
};

/// Generative model handle. Implementations must be safe for concurrent
/// generate calls.
class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual const std::string& id() const = 0;
    virtual GenerationOutput generate(const std::string& prompt,
                                      const GenerationParams& params) const = 0;
};

/// Repeats the prompt's context block verbatim; without a context block the
/// output is empty. The strongest-possible leaker for end-to-end identities.
class ParrotLlm final : public LlmBackend {
public:
    const std::string& id() const override {
        static const std::string s = "mock://parrot";
        return s;
    }
    GenerationOutput generate(const std::string& prompt,
                              const GenerationParams&) const override {
        auto block = extract_context_block(prompt);
        return {block.value_or(""), {}};
    }
};

/// Always declines. The zero-leakage reference behavior.
class RefuserLlm final : public LlmBackend {
public:
    const std::string& id() const override {
        static const std::string s = "mock://refuser";
        return s;
    }
    GenerationOutput generate(const std::string&, const GenerationParams&) const override {
        return {"I cannot repeat the context.", {}};
    }
};

/// Emits a primed suffix when the prompt ends with the matching prefix and
/// carries no context block; anything else yields empty output. Models a
/// model that memorized training continuations but defers to context.
class MemorizerLlm final : public LlmBackend {
public:
    const std::string& id() const override {
        static const std::string s = "mock://memorizer";
        return s;
    }

    void prime(std::vector<std::pair<std::string, std::string>> pairs) {
        pairs_ = std::move(pairs);
    }

    GenerationOutput generate(const std::string& prompt,
                              const GenerationParams&) const override {
        if (extract_context_block(prompt).has_value()) return {"", {}};
        for (const auto& [prefix, suffix] : pairs_) {
            if (prompt.size() >= prefix.size() &&
                prompt.compare(prompt.size() - prefix.size(), prefix.size(), prefix) == 0)
                return {suffix, {}};
        }
        return {"", {}};
    }

private:
    std::vector<std::pair<std::string, std::string>> pairs_;
};

/// Scripted summarization backend: answers a summarization prompt with the
/// context sentence sharing the most tokens with the question, verbatim, or
/// NO_OUTPUT when nothing overlaps.
class ExtractiveSummarizerLlm final : public LlmBackend {
public:
    const std::string& id() const override {
        static const std::string s = "mock://extractive";
        return s;
    }

    GenerationOutput generate(const std::string& prompt,
                              const GenerationParams&) const override {
        size_t qpos = prompt.find("> Question: ");
        size_t cpos = prompt.find("\n> Context:\n>>>\n");
        size_t epos = prompt.rfind("\n>>>\nExtracted relevant parts:");
        if (qpos == std::string::npos || cpos == std::string::npos ||
            epos == std::string::npos || epos <= cpos)
            return {"", {}};
        qpos += 12;
        std::string question = prompt.substr(qpos, prompt.find('\n', qpos) - qpos);
        size_t doc_start = cpos + 16;
        std::string doc = prompt.substr(doc_start, epos - doc_start);

        TokenSeq qtokens = tokenize(question);
        std::string best;
        size_t best_overlap = 0;
        for (const auto& sentence : split_sentences(doc)) {
            TokenSeq stokens = tokenize(sentence);
            std::unordered_set<std::string> sset(stokens.begin(), stokens.end());
            size_t overlap = 0;
            for (const auto& qt : qtokens)
                if (sset.count(qt)) ++overlap;
            if (overlap > best_overlap) {
                best_overlap = overlap;
                best = sentence;
            }
        }
        if (best_overlap == 0) return {"NO_OUTPUT", {}};
        return {best, {}};
    }

private:
    static std::vector<std::string> split_sentences(const std::string& text) {
        std::vector<std::string> out;
        size_t start = 0;
        for (size_t i = 0; i < text.size(); ++i) {
            if (text[i] == '.' || text[i] == '!' || text[i] == '?' || text[i] == '\n') {
                size_t end = (text[i] == '\n') ? i : i + 1;
                while (start < end && text[start] == ' ') ++start;
                if (end > start) out.push_back(text.substr(start, end - start));
                start = i + 1;
            }
        }
        while (start < text.size() && text[start] == ' ') ++start;
        if (start < text.size()) out.push_back(text.substr(start));
        return out;
    }
};

/// Fixed output with ln(0.5) per token; pins the perplexity identity PPL == 2.
class UniformLogprobLlm final : public LlmBackend {
public:
    const std::string& id() const override {
        static const std::string s = "mock://uniform-logprob";
        return s;
    }
    GenerationOutput generate(const std::string&,
                              const GenerationParams& params) const override {
        GenerationOutput out;
        out.text = "the quick brown fox jumps over the lazy dog";
        if (params.want_logprobs) {
            for (const auto& tok : tokenize(out.text))
                out.token_logprobs.push_back({tok, std::log(0.5)});
        }
        return out;
    }
};

/// Relevance scorer for retrieved documents; higher scores mean more relevant.
class RerankBackend {
public:
    virtual ~RerankBackend() = default;
    virtual const std::string& id() const = 0;
    virtual std::vector<double> score(const std::string& query,
                                      std::span<const std::string> documents) const = 0;
};

/// Offline reranker: scores each document by ROUGE-L recall against the query.
class LocalRougeReranker final : public RerankBackend {
public:
    const std::string& id() const override {
        static const std::string s = "local";
        return s;
    }
    std::vector<double> score(const std::string& query,
                              std::span<const std::string> documents) const override {
        TokenSeq q = tokenize(query);
        std::vector<double> out;
        out.reserve(documents.size());
        for (const auto& doc : documents)
            out.push_back(rouge_l(tokenize(doc), q).recall);
        return out;
    }
};

inline std::shared_ptr<LlmBackend> make_mock_llm(const std::string& behavior) {
    if (behavior == "parrot") return std::make_shared<ParrotLlm>();
    if (behavior == "refuser") return std::make_shared<RefuserLlm>();
    if (behavior == "memorizer") return std::make_shared<MemorizerLlm>();
    if (behavior == "extractive") return std::make_shared<ExtractiveSummarizerLlm>();
    if (behavior == "uniform-logprob") return std::make_shared<UniformLogprobLlm>();
    throw Error("unknown mock LLM behavior: " + behavior);
}

}  // namespace ragleak
