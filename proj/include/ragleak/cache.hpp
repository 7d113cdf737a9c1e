#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "ragleak/digest.hpp"
#include "ragleak/error.hpp"

namespace ragleak {

/// Append-only response cache backed by a JSONL file. Keys are SHA-256 hex
/// digests of the request material; values are raw backend response bodies,
/// returned byte-identically on hit. Corrupt lines are skipped (and counted)
/// rather than poisoning the run. Reads are concurrent; writes serialize.
class ResponseCache {
public:
    explicit ResponseCache(const std::string& dir) {
        std::filesystem::create_directories(dir);
        path_ = (std::filesystem::path(dir) / "cache.jsonl").string();
        std::ifstream in(path_);
        std::string line;
        while (in && std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                auto rec = nlohmann::json::parse(line);
                entries_[rec.at("key").get<std::string>()] =
                    rec.at("response").get<std::string>();
            } catch (const std::exception&) {
                ++corrupt_lines_;
            }
        }
    }

    static std::string key_for(std::string_view material) { return sha256_hex(material); }

    std::optional<std::string> lookup(const std::string& key) const {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    void store(const std::string& key, const std::string& response) {
        std::lock_guard<std::mutex> lock(mutex_);
        if (entries_.count(key)) return;  // append-only, first writer wins
        entries_[key] = response;
        nlohmann::json rec;
        rec["key"] = key;
        rec["response"] = response;
        rec["ts"] = static_cast<int64_t>(std::time(nullptr));
        std::ofstream out(path_, std::ios::app);
        if (!out) throw Error("cannot append to cache file: " + path_);
        out << rec.dump() << "\n";
    }

    size_t size() const {
        std::lock_guard<std::mutex> lock(mutex_);
        return entries_.size();
    }
    size_t corrupt_lines() const { return corrupt_lines_; }
    const std::string& path() const { return path_; }

private:
    std::string path_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, std::string> entries_;
    size_t corrupt_lines_ = 0;
};

}  // namespace ragleak
