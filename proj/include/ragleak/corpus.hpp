#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ragleak/error.hpp"
#include "ragleak/rng.hpp"
#include "ragleak/tokenizer.hpp"

namespace ragleak {

enum class Dataset { email, dialogue, generic };

inline const char* dataset_name(Dataset d) {
    switch (d) {
        case Dataset::email: return "email";
        case Dataset::dialogue: return "dialogue";
        case Dataset::generic: return "generic";
    }
    return "generic";
}

inline Dataset dataset_from_name(const std::string& s) {
    if (s == "email") return Dataset::email;
    if (s == "dialogue") return Dataset::dialogue;
    if (s == "generic") return Dataset::generic;
    throw Error("unknown dataset kind: " + s);
}

enum class SplitTag { retrieval, heldout, unsplit };

/// One retrievable unit: a single email, dialogue, or generic text piece.
struct DocumentPiece {
    std::string id;
    Dataset dataset = Dataset::generic;
    std::string text;
    std::map<std::string, std::string> fields;
    size_t token_count = 0;
};

inline std::string dialogue_text(const std::string& input, const std::string& output) {
    return "input: " + input + "\noutput: " + output;
}

inline DocumentPiece make_piece(std::string id, Dataset dataset, std::string text,
                                std::map<std::string, std::string> fields = {}) {
    if (text.empty()) throw Error("piece text must be non-empty (id=" + id + ")");
    DocumentPiece p;
    p.id = std::move(id);
    p.dataset = dataset;
    p.text = std::move(text);
    p.fields = std::move(fields);
    p.token_count = token_count(p.text);
    return p;
}

/// Immutable, ordered collection of pieces with unique ids.
class Corpus {
public:
    Corpus() = default;
    Corpus(std::string name, std::vector<DocumentPiece> pieces,
           SplitTag tag = SplitTag::unsplit)
        : name_(std::move(name)), tag_(tag), pieces_(std::move(pieces)) {
        by_id_.reserve(pieces_.size());
        for (size_t i = 0; i < pieces_.size(); ++i) {
            if (!by_id_.emplace(pieces_[i].id, i).second)
                throw Error("duplicate piece id in corpus '" + name_ +
                            "': " + pieces_[i].id);
        }
    }

    const std::string& name() const { return name_; }
    SplitTag split_tag() const { return tag_; }
    const std::vector<DocumentPiece>& pieces() const { return pieces_; }
    size_t size() const { return pieces_.size(); }
    bool empty() const { return pieces_.empty(); }

    const DocumentPiece* find(const std::string& id) const {
        auto it = by_id_.find(id);
        return it == by_id_.end() ? nullptr : &pieces_[it->second];
    }

private:
    std::string name_;
    SplitTag tag_ = SplitTag::unsplit;
    std::vector<DocumentPiece> pieces_;
    std::unordered_map<std::string, size_t> by_id_;
};

struct IngestResult {
    Corpus corpus;
    size_t skipped_empty = 0;
};

namespace detail {

inline std::map<std::string, std::string> fields_from_json(const nlohmann::json& rec) {
    std::map<std::string, std::string> fields;
    if (rec.contains("fields") && rec["fields"].is_object()) {
        for (auto& [k, v] : rec["fields"].items())
            fields[k] = v.is_string() ? v.get<std::string>() : v.dump();
    }
    return fields;
}

inline std::string id_from_json(const nlohmann::json& rec, const char* prefix,
                                size_t ordinal) {
    if (rec.contains("id")) {
        const auto& id = rec["id"];
        if (id.is_string()) return id.get<std::string>();
        if (id.is_number_integer()) return std::to_string(id.get<int64_t>());
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s-%05zu", prefix, ordinal);
    return buf;
}

template <typename Fn>
void for_each_jsonl_record(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open JSONL file: " + path);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(path + ": malformed JSON at line " + std::to_string(line_no) +
                        ": " + e.what());
        }
        if (!rec.is_object())
            throw Error(path + ": line " + std::to_string(line_no) +
                        " is not a JSON object");
        fn(rec, line_no);
    }
}

}  // namespace detail

/// Ingests a JSONL email corpus: one object per line with a "body" string and
/// optional "id". Records with an empty body are skipped and counted.
inline IngestResult ingest_email_corpus(const std::string& path,
                                        Dataset dataset = Dataset::email) {
    std::vector<DocumentPiece> pieces;
    size_t skipped = 0;
    detail::for_each_jsonl_record(path, [&](const nlohmann::json& rec, size_t line_no) {
        const char* body_key = rec.contains("body") ? "body" : "text";
        if (!rec.contains(body_key) || !rec[body_key].is_string())
            throw Error(path + ": line " + std::to_string(line_no) +
                        ": missing string field \"body\"");
        std::string body = rec[body_key].get<std::string>();
        if (body.empty()) {
            ++skipped;
            return;
        }
        pieces.push_back(make_piece(detail::id_from_json(rec, "email", pieces.size()),
                                    dataset, std::move(body),
                                    detail::fields_from_json(rec)));
    });
    return {Corpus(path, std::move(pieces)), skipped};
}

/// Ingests a JSONL dialogue corpus: one object per line with "input" and
/// "output" strings (capitalized key variants are accepted). Piece text uses
/// the lowercase "input: ...\noutput: ..." template.
inline IngestResult ingest_dialogue_corpus(const std::string& path) {
    std::vector<DocumentPiece> pieces;
    auto get_field = [&](const nlohmann::json& rec, const char* lower, const char* upper,
                         size_t line_no) {
        const char* key = rec.contains(lower) ? lower : upper;
        if (!rec.contains(key) || !rec[key].is_string())
            throw Error(path + ": line " + std::to_string(line_no) +
                        ": missing string field \"" + lower + "\"");
        return rec[key].get<std::string>();
    };
    detail::for_each_jsonl_record(path, [&](const nlohmann::json& rec, size_t line_no) {
        std::string input = get_field(rec, "input", "Input", line_no);
        std::string output = get_field(rec, "output", "Output", line_no);
        auto fields = detail::fields_from_json(rec);
        fields["input_text"] = input;
        fields["output_text"] = output;
        pieces.push_back(make_piece(detail::id_from_json(rec, "dialogue", pieces.size()),
                                    Dataset::dialogue, dialogue_text(input, output),
                                    std::move(fields)));
    });
    return {Corpus(path, std::move(pieces)), 0};
}

/// Writes a corpus back to the ingest JSONL schema (email pieces as
/// {"id","body"}, dialogue pieces as {"id","input","output"}, generic as
/// {"id","text"}; non-empty extra fields ride along under "fields").
inline void save_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write JSONL file: " + path);
    for (const auto& p : corpus.pieces()) {
        nlohmann::json rec;
        rec["id"] = p.id;
        auto fields = p.fields;
        if (p.dataset == Dataset::dialogue) {
            rec["input"] = fields.count("input_text") ? fields["input_text"] : "";
            rec["output"] = fields.count("output_text") ? fields["output_text"] : "";
            fields.erase("input_text");
            fields.erase("output_text");
        } else if (p.dataset == Dataset::email) {
            rec["body"] = p.text;
        } else {
            rec["text"] = p.text;
        }
        if (!fields.empty()) rec["fields"] = fields;
        out << rec.dump() << "\n";
    }
}

/// Loads a corpus previously written by save_corpus_jsonl.
inline Corpus load_corpus_jsonl(const std::string& path, Dataset kind) {
    if (kind == Dataset::dialogue) return ingest_dialogue_corpus(path).corpus;
    return ingest_email_corpus(path, kind).corpus;
}

/// Deterministic split into (retrieval, heldout). Heldout size is
/// round(fraction * N), clamped to [1, N-1].
inline std::pair<Corpus, Corpus> split_corpus(const Corpus& corpus,
                                              double heldout_fraction, uint64_t seed) {
    if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0))
        throw Error("heldout_fraction must be in (0,1)");
    const size_t n = corpus.size();
    if (n < 2) throw Error("split requires at least 2 pieces");
    size_t h = static_cast<size_t>(std::llround(heldout_fraction * static_cast<double>(n)));
    h = std::max<size_t>(1, std::min(h, n - 1));

    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<bool> is_heldout(n, false);
    for (size_t i = 0; i < h; ++i) is_heldout[order[i]] = true;

    std::vector<DocumentPiece> retrieval, heldout;
    retrieval.reserve(n - h);
    heldout.reserve(h);
    for (size_t i = 0; i < n; ++i)
        (is_heldout[i] ? heldout : retrieval).push_back(corpus.pieces()[i]);
    return {Corpus(corpus.name(), std::move(retrieval), SplitTag::retrieval),
            Corpus(corpus.name(), std::move(heldout), SplitTag::heldout)};
}

/// Samples n contiguous token windows (each at most max_tokens long, default
/// 15) from randomly chosen pieces. Deterministic per seed.
inline std::vector<std::string> sample_information_chunks(const Corpus& seed_corpus,
                                                          size_t n, size_t max_tokens,
                                                          uint64_t seed) {
    if (n == 0) throw Error("chunk count must be positive");
    if (max_tokens == 0) throw Error("max_tokens must be positive");
    if (seed_corpus.empty()) throw Error("seed corpus is empty");

    std::vector<TokenSeq> token_cache;
    std::vector<size_t> eligible;
    token_cache.reserve(seed_corpus.size());
    for (size_t i = 0; i < seed_corpus.size(); ++i) {
        token_cache.push_back(tokenize(seed_corpus.pieces()[i].text));
        if (!token_cache.back().empty()) eligible.push_back(i);
    }
    if (eligible.empty()) throw Error("seed corpus has no tokenizable pieces");

    Rng rng(seed);
    std::vector<std::string> chunks;
    chunks.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const TokenSeq& toks = token_cache[eligible[rng.bounded(eligible.size())]];
        size_t len = std::min(max_tokens, toks.size());
        size_t start = static_cast<size_t>(rng.bounded(toks.size() - len + 1));
        chunks.push_back(join_tokens(toks, start, start + len));
    }
    return chunks;
}

namespace detail {

inline const std::vector<std::string>& synth_words() {
    static const std::vector<std::string> words = {
        "meeting",  "schedule", "project",  "report",   "update",  "budget",
        "review",   "draft",    "deadline", "contract", "client",  "office",
        "travel",   "lunch",    "friday",   "monday",   "morning", "afternoon",
        "question", "answer",   "thanks",   "please",   "send",    "forward",
        "attached", "document", "proposal", "feedback", "agenda",  "minutes",
        "quarter",  "results",  "revenue",  "forecast", "energy",  "market",
        "trading",  "price",    "risk",     "analysis", "model",   "data",
        "system",   "server",   "access",   "account",  "issue",   "resolved",
        "pending",  "approved", "signed",   "copy",     "version", "final",
        "team",     "group",    "manager",  "director", "call",    "conference",
        "room",     "building", "floor",    "desk",     "notes",   "summary",
        "details",  "plan",     "strategy", "goal",     "target",  "metric",
        "weekly",   "monthly",  "annual",   "holiday",  "vacation", "leave",
        "health",   "doctor",   "patient",  "symptom",  "pain",    "treatment",
        "medicine", "dose",     "daily",    "morningly", "rest",    "water",
        "exercise", "sleep",    "stress",   "diet",     "blood",   "pressure",
        "test",     "scan",     "clinic",   "visit",    "advice",  "care",
        "mild",     "severe",   "chronic",  "acute",    "left",    "right",
        "upper",    "lower",    "back",     "head",     "chest",   "stomach",
    };
    return words;
}

inline const std::vector<std::string>& synth_names() {
    static const std::vector<std::string> names = {
        "terri", "vince", "steven", "paulo", "lorraine", "naseem", "alex",
        "jordan", "casey", "morgan", "riley", "quinn",   "avery",  "dana",
    };
    return names;
}

inline std::string synth_word(Rng& rng) {
    const auto& w = synth_words();
    return w[rng.bounded(w.size())];
}

inline std::string synth_sentence(Rng& rng, size_t n_words) {
    std::string s;
    for (size_t i = 0; i < n_words; ++i) {
        std::string w = synth_word(rng);
        if (i == 0) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
        if (i > 0) s.push_back(' ');
        s += w;
    }
    s.push_back('.');
    return s;
}

inline std::string synth_phone(Rng& rng) {
    auto seg = [&rng](int digits, bool nanp_first) {
        std::string s;
        for (int i = 0; i < digits; ++i) {
            int lo = (i == 0 && nanp_first) ? 2 : 0;
            s.push_back(static_cast<char>('0' + lo + rng.bounded(10 - lo)));
        }
        return s;
    };
    return seg(3, true) + "-" + seg(3, true) + "-" + seg(4, false);
}

inline std::string synth_email_address(Rng& rng) {
    const auto& names = synth_names();
    static const std::vector<std::string> domains = {
        "example.com", "example.org", "example.net", "mail.example.com"};
    std::string local = names[rng.bounded(names.size())];
    local.push_back(static_cast<char>('0' + rng.bounded(10)));
    local.push_back(static_cast<char>('0' + rng.bounded(10)));
    return local + "@" + domains[rng.bounded(domains.size())];
}

inline std::string synth_url(Rng& rng) {
    return "https://" + synth_word(rng) + ".example.com/" + synth_word(rng);
}

}  // namespace detail

/// Generates a synthetic corpus. Email pieces are multi-sentence bodies of at
/// least 25 tokens; a pii_rate fraction of them embed one phone number, one
/// email address and one URL, each recorded in the piece fields
/// (pii_phone / pii_email / pii_url) for ground-truth checks. Dialogue pieces
/// use short inputs and long outputs in the "input: ...\noutput: ..."
/// template. Deterministic per seed.
inline Corpus synthesize_corpus(Dataset kind, size_t n, double pii_rate, uint64_t seed) {
    if (n == 0) throw Error("corpus size must be positive");
    if (pii_rate < 0.0 || pii_rate > 1.0) throw Error("pii_rate must be in [0,1]");
    if (kind == Dataset::generic) throw Error("synthesize_corpus supports email|dialogue");

    Rng rng(seed);
    std::vector<DocumentPiece> pieces;
    pieces.reserve(n);

    if (kind == Dataset::email) {
        size_t n_pii = static_cast<size_t>(std::llround(pii_rate * static_cast<double>(n)));
        std::vector<size_t> order(n);
        for (size_t i = 0; i < n; ++i) order[i] = i;
        rng.shuffle(order);
        std::vector<bool> with_pii(n, false);
        for (size_t i = 0; i < n_pii; ++i) with_pii[order[i]] = true;

        for (size_t i = 0; i < n; ++i) {
            size_t n_sentences = 4 + rng.bounded(3);
            std::string body;
            for (size_t s = 0; s < n_sentences; ++s) {
                if (s > 0) body.push_back(' ');
                body += detail::synth_sentence(rng, 7 + rng.bounded(6));
            }
            std::map<std::string, std::string> fields;
            if (with_pii[i]) {
                std::string phone = detail::synth_phone(rng);
                std::string email = detail::synth_email_address(rng);
                std::string url = detail::synth_url(rng);
                body += " You can call me at " + phone + ".";
                body += " Reach me by email at " + email + ".";
                body += " More details at " + url + ".";
                fields["pii_phone"] = phone;
                fields["pii_email"] = email;
                fields["pii_url"] = url;
            }
            char id[32];
            std::snprintf(id, sizeof(id), "synth-email-%05zu", i);
            pieces.push_back(make_piece(id, Dataset::email, std::move(body),
                                        std::move(fields)));
        }
        return Corpus("synth-email", std::move(pieces));
    }

    for (size_t i = 0; i < n; ++i) {
        size_t in_words = 3 + rng.bounded(3);
        size_t out_words = 55 + rng.bounded(16);
        std::string input = "what helps with";
        for (size_t w = 0; w < in_words; ++w) input += " " + detail::synth_word(rng);
        std::string output;
        for (size_t w = 0; w < out_words; ++w) {
            if (w > 0) output.push_back(' ');
            output += detail::synth_word(rng);
        }
        std::map<std::string, std::string> fields = {{"input_text", input},
                                                     {"output_text", output}};
        char id[32];
        std::snprintf(id, sizeof(id), "synth-dial-%05zu", i);
        pieces.push_back(make_piece(id, Dataset::dialogue, dialogue_text(input, output),
                                    std::move(fields)));
    }
    return Corpus("synth-dialogue", std::move(pieces));
}

}  // namespace ragleak
