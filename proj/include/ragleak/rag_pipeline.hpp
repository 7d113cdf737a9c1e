#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ragleak/corpus.hpp"
#include "ragleak/embedding.hpp"
#include "ragleak/llm_backends.hpp"
#include "ragleak/prompts.hpp"
#include "ragleak/vector_index.hpp"

namespace ragleak {

/// Mitigation layers around the undefended pipeline. The system-prompt and
/// noise baselines are mutually exclusive alternatives.
struct DefenseConfig {
    std::optional<double> threshold;  // overrides the retriever threshold
    bool rerank = false;
    SummarizationMode summarization = SummarizationMode::none;
    std::string system_prompt_id;  // empty = off; P1..P5 otherwise
    size_t noise_tokens = 0;
    NoiseUnit noise_unit = NoiseUnit::tokens;
    uint64_t noise_seed = 0;

    bool is_noop() const {
        return !threshold && !rerank && summarization == SummarizationMode::none &&
               system_prompt_id.empty() && noise_tokens == 0;
    }

    void validate() const {
        if (!system_prompt_id.empty() && noise_tokens > 0)
            throw Error("system prompt and noise baselines are mutually exclusive");
        if (!system_prompt_id.empty()) protective_prompt(system_prompt_id);
        if (threshold && !(*threshold >= 0.0))
            throw Error("defense threshold must be >= 0");
    }
};

/// One full model round trip: what was asked, what was retrieved, what the
/// model actually saw, and what came back.
struct GenerationRecord {
    std::string query_id;
    std::string composed_prompt;
    RetrievalResult retrieved;
    std::vector<std::string> shown_texts;  // post-defense, prompt order
    std::string output_text;
    std::vector<TokenLogprob> token_logprobs;
    GenerationParams params;
    DefenseConfig defense;
    std::vector<std::string> warnings;
};

struct RagClients {
    const EmbeddingBackend* embedder = nullptr;
    const LlmBackend* llm = nullptr;
    const RerankBackend* reranker = nullptr;
    const LlmBackend* summarizer = nullptr;  // nullptr falls back to llm

    const LlmBackend& summarizer_or_llm() const { return summarizer ? *summarizer : *llm; }
};

/// Calls the generative backend and captures its response verbatim. Empty or
/// refused responses are recorded as empty output, not raised.
inline GenerationOutput generate(const std::string& prompt, const GenerationParams& params,
                                 const LlmBackend& client) {
    if (prompt.empty()) throw Error("cannot generate from an empty prompt");
    params.validate();
    return client.generate(prompt, params);
}

/// Reorders texts by descending reranker score (ties keep the original
/// order). On backend failure the input order is kept and a warning recorded.
inline std::vector<std::string> rerank(const std::string& query,
                                       const std::vector<std::string>& texts,
                                       const RerankBackend& client,
                                       std::vector<std::string>* warnings = nullptr) {
    if (texts.empty()) throw Error("rerank requires a non-empty list");
    std::vector<double> scores;
    try {
        scores = client.score(query, texts);
        if (scores.size() != texts.size())
            throw Error("reranker returned " + std::to_string(scores.size()) +
                        " scores for " + std::to_string(texts.size()) + " documents");
    } catch (const std::exception& e) {
        if (warnings) warnings->push_back(std::string("rerank failed, keeping order: ") + e.what());
        return texts;
    }
    std::vector<size_t> order(texts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&scores](size_t a, size_t b) { return scores[a] > scores[b]; });
    std::vector<std::string> out;
    out.reserve(texts.size());
    for (size_t i : order) out.push_back(texts[i]);
    return out;
}

/// Summarizes one retrieved document relative to the query using the sum /
/// sum_para prompt. NO_OUTPUT maps to an empty string; backend failure passes
/// the document through unchanged with a warning.
inline std::string summarize(const std::string& query, const std::string& doc,
                             SummarizationMode mode, const LlmBackend& client,
                             const GenerationParams& params,
                             std::vector<std::string>* warnings = nullptr) {
    std::string prompt = summarization_prompt(query, doc, mode);
    GenerationOutput out;
    try {
        out = client.generate(prompt, params);
    } catch (const std::exception& e) {
        if (warnings)
            warnings->push_back(std::string("summarize failed, passing document through: ") +
                                e.what());
        return doc;
    }
    std::string text = out.text;
    // Trim whitespace before the NO_OUTPUT comparison.
    size_t b = text.find_first_not_of(" \t\r\n");
    size_t e = text.find_last_not_of(" \t\r\n");
    std::string trimmed = b == std::string::npos ? "" : text.substr(b, e - b + 1);
    if (trimmed == "NO_OUTPUT") return "";
    return text;
}

/// The full pipeline: retrieve (threshold gate) -> rerank -> summarize ->
/// assemble -> noise/system-prompt baseline -> generate. Defenses apply in
/// that fixed order. `index` may be null, which models the no-retrieval
/// configuration: the prompt is the bare question.
inline GenerationRecord answer(const std::string& query, const std::string& query_id,
                               const VectorIndex* index, const Corpus& docs,
                               RetrieverConfig retriever_cfg, const DefenseConfig& defense,
                               const GenerationParams& params, const RagClients& clients) {
    defense.validate();
    params.validate();
    if (!clients.llm) throw Error("answer requires an LLM client");

    GenerationRecord rec;
    rec.query_id = query_id;
    rec.params = params;
    rec.defense = defense;
    rec.retrieved.query_id = query_id;

    std::vector<std::string> texts;
    if (index) {
        if (!clients.embedder) throw Error("answer requires an embedding client");
        if (defense.threshold) retriever_cfg.threshold = *defense.threshold;
        try {
            rec.retrieved = index->retrieve(query, retriever_cfg, *clients.embedder, query_id);
        } catch (const std::exception& e) {
            throw Error(std::string("stage retrieve: ") + e.what());
        }
        for (const auto& hit : rec.retrieved.hits) {
            const DocumentPiece* piece = docs.find(hit.piece_id);
            if (!piece) throw Error("stage retrieve: unknown piece id " + hit.piece_id);
            texts.push_back(piece->text);
        }
    }

    if (defense.rerank && texts.size() > 1) {
        if (!clients.reranker) throw Error("stage rerank: no reranker client configured");
        texts = rerank(query, texts, *clients.reranker, &rec.warnings);
    }

    if (defense.summarization != SummarizationMode::none && !texts.empty()) {
        std::vector<std::string> kept;
        for (const auto& t : texts) {
            std::string s = summarize(query, t, defense.summarization,
                                      clients.summarizer_or_llm(), params, &rec.warnings);
            if (!s.empty()) kept.push_back(std::move(s));
        }
        texts = std::move(kept);
    }

    rec.shown_texts = texts;
    rec.composed_prompt = assemble_prompt(texts, query);

    if (defense.noise_tokens > 0) {
        rec.composed_prompt =
            noise_prefix(defense.noise_tokens, defense.noise_unit, defense.noise_seed) +
            "\n" + rec.composed_prompt;
    } else if (!defense.system_prompt_id.empty()) {
        rec.composed_prompt =
            protective_prompt(defense.system_prompt_id) + "\n" + rec.composed_prompt;
    }

    GenerationOutput out;
    try {
        out = generate(rec.composed_prompt, params, *clients.llm);
    } catch (const BackendError& e) {
        throw BackendError(std::string("stage generate: ") + e.what(), e.http_status,
                           e.retryable);
    } catch (const std::exception& e) {
        throw Error(std::string("stage generate: ") + e.what());
    }
    rec.output_text = std::move(out.text);
    rec.token_logprobs = std::move(out.token_logprobs);
    return rec;
}

}  // namespace ragleak
