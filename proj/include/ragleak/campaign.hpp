#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ragleak/config.hpp"

namespace ragleak {

struct PromptOutcome {
    AttackPrompt prompt;
    GenerationRecord record;
    LeakageVerdict verdict;
    bool failed = false;
    std::string error;
};

struct CampaignOutcome {
    CampaignReport report;
    std::vector<PromptOutcome> outcomes;
    size_t failed_prompts = 0;
};

struct UtilityResult {
    std::optional<double> avg_rouge_l;认
    std::optional<double> avg_perplexity;
    size_t n_evaluated = 0;
    size_t n_excluded = 0;
};

namespace detail {

/// Runs fn(0..n) over a bounded worker pool; item order in the output is the
/// caller's problem (each fn writes its own slot).
template <typename Fn>
void parallel_for(size_t n, size_t concurrency, Fn&& fn) {
    size_t workers = std::max<size_t>(1, std::min(concurrency, n));
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    for (auto& t : pool) t.join();
}

inline Corpus resolve_corpus(const CampaignConfig& cfg) {
    if (cfg.corpus_source == "synth")
        return synthesize_corpus(cfg.corpus_kind, cfg.synth_n, cfg.synth_pii_rate,
                                 cfg.corpus_seed);
    return load_corpus_jsonl(cfg.corpus_path, cfg.corpus_kind);
}

inline std::vector<AttackPrompt> build_prompts(const CampaignConfig& cfg,
                                               const Corpus& corpus) {
    switch (cfg.attack_kind) {
        case AttackKind::untargeted: {
            Corpus seeds = cfg.seed_corpus_path.empty()
                               ? corpus
                               : load_corpus_jsonl(cfg.seed_corpus_path, Dataset::generic);
            return untargeted_prompts(seeds, cfg.attack_n, cfg.command, cfg.attack_seed,
                                      cfg.info_max_tokens);
        }
        case AttackKind::targeted_retrieval: {
            std::vector<std::string> targets = cfg.targets_path.empty()
                                                   ? builtin_disease_names()
                                                   : load_catalog_file(cfg.targets_path);
            if (cfg.attack_n > 0 && targets.size() > cfg.attack_n)
                targets.resize(cfg.attack_n);
            return targeted_retrieval_prompts(targets, cfg.target_template, cfg.command);
        }
        case AttackKind::targeted_llm: {
            auto prompts = targeted_llm_prompts(cfg.pii_category);
            if (cfg.attack_n > 0 && prompts.size() > cfg.attack_n)
                prompts.resize(cfg.attack_n);
            return prompts;
        }
        case AttackKind::prefix:
            return prefix_attack_inputs(corpus, cfg.prefix_tokens, cfg.attack_seed,
                                        cfg.attack_n);
    }
    throw Error("unreachable attack kind");
}

inline uint64_t per_prompt_noise_seed(uint64_t campaign_seed, const std::string& prompt_id) {
    return campaign_seed ^ fnv1a64(prompt_id);
}

}  // namespace detail

/// Runs one campaign: corpus -> index -> attack prompts -> answers ->
/// verdicts -> aggregated report. Deterministic given mock backends and the
/// config seeds. Backend failures mark individual prompts failed and the
/// report incomplete instead of aborting the run.
inline CampaignOutcome run_campaign(const CampaignConfig& cfg) {
    Corpus corpus = detail::resolve_corpus(cfg);

    std::unique_ptr<ResponseCache> cache;
    if (!cfg.cache_dir.empty()) cache = std::make_unique<ResponseCache>(cfg.cache_dir);

    auto embedder = make_embedding_backend(cfg.embedding_backend, cfg.embedding_model,
                                           cfg.backend_opts, cache.get());
    auto llm = make_llm_backend(cfg.llm_backend, cfg.backend_opts, cache.get());
    auto reranker = make_rerank_backend(cfg.rerank_backend, cfg.backend_opts, cache.get());
    std::shared_ptr<LlmBackend> summarizer;
    if (!cfg.summarizer_backend.empty())
        summarizer = make_llm_backend(cfg.summarizer_backend, cfg.backend_opts, cache.get());

    std::optional<VectorIndex> index;
    if (cfg.rag_enabled) index = VectorIndex::build(corpus, *embedder, cfg.concurrency);

    std::vector<AttackPrompt> prompts = detail::build_prompts(cfg, corpus);

    if (auto memorizer = std::dynamic_pointer_cast<MemorizerLlm>(llm)) {
        std::vector<std::pair<std::string, std::string>> pairs;
        for (const auto& p : prompts)
            if (p.kind == AttackKind::prefix)
                pairs.emplace_back(p.information, p.reference_suffix);
        memorizer->prime(std::move(pairs));
    }

    RagClients clients;
    clients.embedder = embedder.get();
    clients.llm = llm.get();
    clients.reranker = reranker.get();
    clients.summarizer = summarizer.get();

    CampaignOutcome out;
    out.outcomes.resize(prompts.size());
    detail::parallel_for(prompts.size(), cfg.concurrency, [&](size_t i) {
        PromptOutcome& po = out.outcomes[i];
        po.prompt = prompts[i];
        DefenseConfig defense = cfg.defense;
        if (defense.noise_tokens > 0)
            defense.noise_seed = detail::per_prompt_noise_seed(cfg.seed, prompts[i].id);
        try {
            po.record = answer(prompts[i].composed, prompts[i].id,
                               index ? &*index : nullptr, corpus, cfg.retriever, defense,
                               cfg.params, clients);
            std::vector<RetrievedDoc> docs;
            for (const auto& hit : po.record.retrieved.hits) {
                const DocumentPiece* piece = corpus.find(hit.piece_id);
                docs.push_back({hit.piece_id, piece ? piece->text : ""});
            }
            std::string target =
                cfg.attack_kind == AttackKind::targeted_retrieval ? prompts[i].target : "";
            po.verdict = judge_prompt(po.record, docs, cfg.metrics, target);
            if (prompts[i].kind == AttackKind::prefix)
                po.verdict.reconstructed =
                    judge_prefix(po.record, prompts[i].reference_suffix, cfg.metrics.rouge_cut);
        } catch (const std::exception& e) {
            po.failed = true;
            po.error = e.what();
        }
    });

    std::vector<LeakageVerdict> verdicts;
    std::vector<RetrievalResult> retrievals;
    for (const auto& po : out.outcomes) {
        if (po.failed) {
            ++out.failed_prompts;
            continue;
        }
        verdicts.push_back(po.verdict);
        retrievals.push_back(po.record.retrieved);
    }
    out.report = aggregate(verdicts, retrievals, cfg.attack_kind, cfg.pii_category);
    out.report.dataset = cfg.name;
    out.report.model = cfg.params.model_id;
    out.report.failed_prompts = out.failed_prompts;
    out.report.incomplete = out.failed_prompts > 0;
    out.report.config_hash = cfg.config_hash();
    return out;
}

/// Held-out utility per the split protocol: dialogue corpora are scored by
/// ROUGE-L of the answer against the gold output; email corpora by perplexity
/// of the continuation of the first 50 tokens.
inline UtilityResult evaluate_utility(const CampaignConfig& cfg) {
    Corpus corpus = detail::resolve_corpus(cfg);
    auto [retrieval, heldout] =
        split_corpus(corpus, cfg.utility_heldout_fraction, cfg.utility_seed);

    std::unique_ptr<ResponseCache> cache;
    if (!cfg.cache_dir.empty()) cache = std::make_unique<ResponseCache>(cfg.cache_dir);
    auto embedder = make_embedding_backend(cfg.embedding_backend, cfg.embedding_model,
                                           cfg.backend_opts, cache.get());
    auto llm = make_llm_backend(cfg.llm_backend, cfg.backend_opts, cache.get());
    auto reranker = make_rerank_backend(cfg.rerank_backend, cfg.backend_opts, cache.get());

    const Corpus& index_corpus = cfg.utility_index_full ? corpus : retrieval;
    std::optional<VectorIndex> index;
    if (cfg.rag_enabled) index = VectorIndex::build(index_corpus, *embedder, cfg.concurrency);

    RagClients clients;
    clients.embedder = embedder.get();
    clients.llm = llm.get();
    clients.reranker = reranker.get();

    size_t n_items = std::min(cfg.utility_max_items, heldout.size());
    const bool rouge_mode = cfg.corpus_kind == Dataset::dialogue;
    GenerationParams params = cfg.params;
    if (!rouge_mode) params.want_logprobs = true;

    std::vector<std::optional<double>> scores(n_items);
    std::vector<std::string> errors(n_items);
    std::atomic<size_t> with_logprobs{0};
    detail::parallel_for(n_items, cfg.concurrency, [&](size_t i) {
        const DocumentPiece& piece = heldout.pieces()[i];
        try {
            std::string query;
            if (rouge_mode) {
                query = piece.fields.at("input_text");
            } else {
                TokenSeq toks = tokenize(piece.text);
                query = join_tokens(toks, 0, std::min<size_t>(50, toks.size()));
            }
            GenerationRecord rec =
                answer(query, piece.id, index ? &*index : nullptr, index_corpus,
                       cfg.retriever, cfg.defense, params, clients);
            if (rouge_mode) {
                scores[i] = rec.output_text.empty()
                                ? 0.0
                                : rouge_l(tokenize(rec.output_text),
                                          tokenize(piece.fields.at("output_text")))
                                      .f1;
            } else if (!rec.token_logprobs.empty()) {
                with_logprobs.fetch_add(1);
                std::vector<double> lps;
                for (const auto& tl : rec.token_logprobs) lps.push_back(tl.logprob);
                scores[i] = perplexity(lps);
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    UtilityResult result;
    double sum = 0.0;
    for (size_t i = 0; i < n_items; ++i) {
        if (scores[i]) {
            sum += *scores[i];
            ++result.n_evaluated;
        } else {
            ++result.n_excluded;
        }
    }
    if (!rouge_mode && n_items > 0 && with_logprobs.load() == 0)
        throw Error("backend " + cfg.llm_backend +
                    " returned no token logprobs; perplexity mode needs a "
                    "logprob-capable backend");
    if (result.n_evaluated > 0) {
        double avg = sum / static_cast<double>(result.n_evaluated);
        if (rouge_mode)
            result.avg_rouge_l = avg;
        else
            result.avg_perplexity = avg;
    } else if (rouge_mode) {
        result.avg_rouge_l = 0.0;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Report emission

inline nlohmann::json report_to_json(const CampaignReport& r) {
    nlohmann::json j;
    j["dataset"] = r.dataset;
    j["model"] = r.model;
    j["n_prompts"] = r.n_prompts;
    j["retrieval_contexts"] = r.retrieval_contexts;
    j["repeat_prompts"] = r.repeat_prompts;
    j["repeat_contexts"] = r.repeat_contexts;
    j["rouge_prompts"] = r.rouge_prompts;
    j["rouge_contexts"] = r.rouge_contexts;
    j["targeted_information"] = r.targeted_information;
    j["reconstructions"] = r.reconstructions;
    j["pii_unique_phone"] = r.pii_unique_phone;
    j["pii_unique_email"] = r.pii_unique_email;
    j["pii_unique_url"] = r.pii_unique_url;
    j["pii_occurrences"] = r.pii_occurrences;
    if (r.avg_rouge_l) j["avg_rouge_l"] = *r.avg_rouge_l;
    if (r.avg_perplexity) j["avg_perplexity"] = *r.avg_perplexity;
    j["failed_prompts"] = r.failed_prompts;
    j["incomplete"] = r.incomplete;
    j["config_hash"] = r.config_hash;
    return j;
}

inline CampaignReport report_from_json(const nlohmann::json& j) {
    CampaignReport r;
    r.dataset = j.value("dataset", "");
    r.model = j.value("model", "");
    r.n_prompts = j.value("n_prompts", size_t{0});
    r.retrieval_contexts = j.value("retrieval_contexts", size_t{0});
    r.repeat_prompts = j.value("repeat_prompts", size_t{0});
    r.repeat_contexts = j.value("repeat_contexts", size_t{0});
    r.rouge_prompts = j.value("rouge_prompts", size_t{0});
    r.rouge_contexts = j.value("rouge_contexts", size_t{0});
    r.targeted_information = j.value("targeted_information", size_t{0});
    r.reconstructions = j.value("reconstructions", size_t{0});
    r.pii_unique_phone = j.value("pii_unique_phone", size_t{0});
    r.pii_unique_email = j.value("pii_unique_email", size_t{0});
    r.pii_unique_url = j.value("pii_unique_url", size_t{0});
    r.pii_occurrences = j.value("pii_occurrences", size_t{0});
    if (j.contains("avg_rouge_l")) r.avg_rouge_l = j["avg_rouge_l"].get<double>();
    if (j.contains("avg_perplexity")) r.avg_perplexity = j["avg_perplexity"].get<double>();
    r.failed_prompts = j.value("failed_prompts", size_t{0});
    r.incomplete = j.value("incomplete", false);
    r.config_hash = j.value("config_hash", "");
    return r;
}

inline constexpr const char* kReportCsvHeader =
    "dataset,model,retrieval_contexts,repeat_prompts,repeat_contexts,rouge_prompts,"
    "rouge_contexts,targeted_information";

inline std::string report_csv_row(const CampaignReport& r) {
    return r.dataset + "," + r.model + "," + std::to_string(r.retrieval_contexts) + "," +
           std::to_string(r.repeat_prompts) + "," + std::to_string(r.repeat_contexts) +
           "," + std::to_string(r.rouge_prompts) + "," + std::to_string(r.rouge_contexts) +
           "," + std::to_string(r.targeted_information);
}

inline std::string report_markdown(const CampaignReport& r) {
    std::string md =
        "| Dataset | Model | Retrieval Contexts | Repeat Prompts | Repeat Contexts | "
        "ROUGE Prompts | ROUGE Contexts | Targeted Information |\n"
        "|---|---|---|---|---|---|---|---|\n";
    md += "| " + r.dataset + " | " + r.model + " | " + std::to_string(r.retrieval_contexts) +
          " | " + std::to_string(r.repeat_prompts) + " | " +
          std::to_string(r.repeat_contexts) + " | " + std::to_string(r.rouge_prompts) +
          " | " + std::to_string(r.rouge_contexts) + " | " +
          std::to_string(r.targeted_information) + " |\n";
    return md;
}

inline nlohmann::json verdict_to_json(const PromptOutcome& po) {
    nlohmann::json j;
    j["prompt_id"] = po.prompt.id;
    j["kind"] = attack_kind_name(po.prompt.kind);
    j["information"] = po.prompt.information;
    j["command"] = po.prompt.command;
    j["target"] = po.prompt.target;
    if (po.failed) {
        j["failed"] = true;
        j["error"] = po.error;
        return j;
    }
    j["composed_prompt"] = po.record.composed_prompt;
    nlohmann::json hits = nlohmann::json::array();
    for (const auto& h : po.record.retrieved.hits)
        hits.push_back({{"id", h.piece_id}, {"distance", h.distance}});
    j["retrieved"] = hits;
    j["output_text"] = po.record.output_text;
    j["max_run"] = po.verdict.max_run;
    j["best_rouge"] = po.verdict.best_rouge;
    j["repeat"] = po.verdict.repeat;
    j["repeat_doc_ids"] = po.verdict.repeat_doc_ids;
    j["rouge_doc_ids"] = po.verdict.rouge_doc_ids;
    j["targeted_hit"] = po.verdict.targeted_hit;
    if (po.prompt.kind == AttackKind::prefix)
        j["reconstructed"] = po.verdict.reconstructed;
    j["pii"] = {{"phone", po.verdict.pii.phone},
                {"email", po.verdict.pii.email},
                {"url", po.verdict.pii.url}};
    if (!po.record.warnings.empty()) j["warnings"] = po.record.warnings;
    return j;
}

enum class ReportFormat { csv, json, markdown };

/// Writes report.json / report.csv / report.md plus the per-prompt
/// verdicts.jsonl into `dir`. File contents are a pure function of the
/// outcome, so reruns emit byte-identical files.
inline void emit_report(const CampaignOutcome& outcome, const CampaignConfig& cfg,
                        const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!std::filesystem::is_directory(dir))
        throw Error("cannot create output directory: " + dir);

    nlohmann::json j = report_to_json(outcome.report);
    j["config"] = cfg.to_json();
    {
        std::ofstream out(std::filesystem::path(dir) / "report.json", std::ios::binary);
        if (!out) throw Error("cannot write report.json in " + dir);
        out << j.dump(2) << "\n";
    }
    {
        std::ofstream out(std::filesystem::path(dir) / "report.csv", std::ios::binary);
        out << kReportCsvHeader << "\n" << report_csv_row(outcome.report) << "\n";
    }
    {
        std::ofstream out(std::filesystem::path(dir) / "report.md", std::ios::binary);
        out << report_markdown(outcome.report);
    }
    {
        std::ofstream out(std::filesystem::path(dir) / "verdicts.jsonl", std::ios::binary);
        for (const auto& po : outcome.outcomes) out << verdict_to_json(po).dump() << "\n";
    }
}

// ---------------------------------------------------------------------------
// Sweeps

enum class SweepDimension { k, threshold, command, temperature, embedding_backend, defense };

inline SweepDimension sweep_dimension_from_name(const std::string& s) {
    if (s == "k") return SweepDimension::k;
    if (s == "threshold") return SweepDimension::threshold;
    if (s == "command") return SweepDimension::command;
    if (s == "temperature") return SweepDimension::temperature;
    if (s == "embedding_backend" || s == "embedding") return SweepDimension::embedding_backend;
    if (s == "defense") return SweepDimension::defense;
    throw Error("unknown sweep dimension: " + s);
}

inline const char* sweep_dimension_name(SweepDimension d) {
    switch (d) {
        case SweepDimension::k: return "k";
        case SweepDimension::threshold: return "threshold";
        case SweepDimension::command: return "command";
        case SweepDimension::temperature: return "temperature";
        case SweepDimension::embedding_backend: return "embedding_backend";
        case SweepDimension::defense: return "defense";
    }
    return "";
}

/// Applies one sweep value to a copy of the config. Defense presets: none,
/// rerank, sum, sum_para, noise, system:P1..P5, threshold=<p>.
inline CampaignConfig apply_sweep_value(CampaignConfig cfg, SweepDimension dim,
                                        const std::string& value) {
    switch (dim) {
        case SweepDimension::k:
            cfg.retriever.k = static_cast<size_t>(std::stoull(value));
            break;
        case SweepDimension::threshold:
            cfg.retriever.threshold = value == "inf"
                                          ? std::numeric_limits<double>::infinity()
                                          : std::stod(value);
            break;
        case SweepDimension::command:
            cfg.command = resolve_command(value);
            break;
        case SweepDimension::temperature:
            cfg.params.temperature = std::stod(value);
            break;
        case SweepDimension::embedding_backend:
            cfg.embedding_backend = value;
            break;
        case SweepDimension::defense: {
            cfg.defense = DefenseConfig{};
            if (value == "none") {
            } else if (value == "rerank") {
                cfg.defense.rerank = true;
            } else if (value == "sum") {
                cfg.defense.summarization = SummarizationMode::sum;
            } else if (value == "sum_para") {
                cfg.defense.summarization = SummarizationMode::sum_para;
            } else if (value == "noise") {
                cfg.defense.noise_tokens = 50;
            } else if (value.rfind("system:", 0) == 0) {
                cfg.defense.system_prompt_id = value.substr(7);
            } else if (value.rfind("threshold=", 0) == 0) {
                cfg.defense.threshold = std::stod(value.substr(10));
            } else {
                throw Error("unknown defense preset: " + value);
            }
            cfg.defense.validate();
            break;
        }
    }
    return cfg;
}

struct SweepPoint {
    std::string value;
    CampaignReport report;
    bool failed = false;
    std::string error;
};

struct SweepOutcome {
    SweepDimension dimension;
    std::vector<SweepPoint> points;
};

/// One campaign per value with everything else frozen. Per-point failures are
/// recorded and the sweep continues.
inline SweepOutcome sweep(const CampaignConfig& base, SweepDimension dim,
                          const std::vector<std::string>& values,
                          const std::string& out_dir = {}) {
    if (values.empty()) throw Error("sweep needs at least one value");
    SweepOutcome out;
    out.dimension = dim;
    for (size_t i = 0; i < values.size(); ++i) {
        SweepPoint point;
        point.value = values[i];
        try {
            CampaignConfig cfg = apply_sweep_value(base, dim, values[i]);
            CampaignOutcome campaign = run_campaign(cfg);
            point.report = campaign.report;
            if (!out_dir.empty()) {
                char sub[32];
                std::snprintf(sub, sizeof(sub), "point_%02zu", i);
                emit_report(campaign, cfg, (std::filesystem::path(out_dir) / sub).string());
            }
        } catch (const std::exception& e) {
            point.failed = true;
            point.error = e.what();
        }
        out.points.push_back(std::move(point));
    }
    return out;
}

inline constexpr const char* kSweepCsvHeader =
    "sweep_dimension,sweep_value,dataset,model,retrieval_contexts,repeat_prompts,"
    "repeat_contexts,rouge_prompts,rouge_contexts,targeted_information,reconstructions";

/// Long-format CSV, one row per sweep value, ready for plotting.
inline std::string sweep_csv(const SweepOutcome& s) {
    std::string csv = std::string(kSweepCsvHeader) + "\n";
    for (const auto& p : s.points) {
        if (p.failed) continue;
        csv += std::string(sweep_dimension_name(s.dimension)) + "," + p.value + "," +
               report_csv_row(p.report) + "," + std::to_string(p.report.reconstructions) +
               "\n";
    }
    return csv;
}

inline void emit_sweep(const SweepOutcome& s, const std::string& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(std::filesystem::path(dir) / "sweep.csv", std::ios::binary);
        if (!out) throw Error("cannot write sweep.csv in " + dir);
        out << sweep_csv(s);
    }
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : s.points) {
        nlohmann::json row;
        row["sweep_dimension"] = sweep_dimension_name(s.dimension);
        row["sweep_value"] = p.value;
        if (p.failed) {
            row["failed"] = true;
            row["error"] = p.error;
        } else {
            row["report"] = report_to_json(p.report);
        }
        j.push_back(row);
    }
    std::ofstream out(std::filesystem::path(dir) / "sweep.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

}  // namespace ragleak
