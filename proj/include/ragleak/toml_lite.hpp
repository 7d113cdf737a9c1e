#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ragleak/error.hpp"

namespace ragleak {

/// Minimal TOML subset: [section] headers, key = value pairs, "#" comments.
/// Values: quoted strings (with ${ENV} interpolation), integers, floats
/// (including "inf"), booleans, and flat arrays of those. Enough for flat
/// campaign configs; nested tables are out of scope.
struct TomlValue {
    enum class Kind { string, integer, floating, boolean, array };
    Kind kind = Kind::string;
    std::string str;
    int64_t int_val = 0;
    double float_val = 0.0;
    bool bool_val = false;
    std::vector<TomlValue> array;

    double as_double() const {
        if (kind == Kind::floating) return float_val;
        if (kind == Kind::integer) return static_cast<double>(int_val);
        throw Error("TOML value is not a number");
    }
};

class TomlTable {
public:
    using Section = std::map<std::string, TomlValue>;

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    const TomlValue& get(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        if (s == sections_.end() || !s->second.count(key))
            throw Error("missing config key [" + section + "] " + key);
        return s->second.at(key);
    }

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
        if (!has(section, key)) return fallback;
        const TomlValue& v = get(section, key);
        if (v.kind != TomlValue::Kind::string)
            throw Error("config key [" + section + "] " + key + " must be a string");
        return v.str;
    }

    int64_t get_int(const std::string& section, const std::string& key,
                    int64_t fallback) const {
        if (!has(section, key)) return fallback;
        const TomlValue& v = get(section, key);
        if (v.kind != TomlValue::Kind::integer)
            throw Error("config key [" + section + "] " + key + " must be an integer");
        return v.int_val;
    }

    double get_double(const std::string& section, const std::string& key,
                      double fallback) const {
        if (!has(section, key)) return fallback;
        return get(section, key).as_double();
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        const TomlValue& v = get(section, key);
        if (v.kind != TomlValue::Kind::boolean)
            throw Error("config key [" + section + "] " + key + " must be a boolean");
        return v.bool_val;
    }

    std::vector<std::string> get_string_array(const std::string& section,
                                              const std::string& key) const {
        std::vector<std::string> out;
        if (!has(section, key)) return out;
        const TomlValue& v = get(section, key);
        if (v.kind != TomlValue::Kind::array)
            throw Error("config key [" + section + "] " + key + " must be an array");
        for (const auto& e : v.array) {
            if (e.kind != TomlValue::Kind::string)
                throw Error("config key [" + section + "] " + key +
                            " must hold only strings");
            out.push_back(e.str);
        }
        return out;
    }

    void set(const std::string& section, const std::string& key, TomlValue value) {
        sections_[section][key] = std::move(value);
    }

    const std::map<std::string, Section>& sections() const { return sections_; }

private:
    std::map<std::string, Section> sections_;
};

namespace detail {

inline std::string interpolate_env(const std::string& s, size_t line_no) {
    std::string out;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] == '$' && i + 1 < s.size() && s[i + 1] == '{') {
            size_t close = s.find('}', i + 2);
            if (close == std::string::npos)
                throw Error("unterminated ${...} at config line " + std::to_string(line_no));
            std::string var = s.substr(i + 2, close - i - 2);
            const char* val = std::getenv(var.c_str());
            if (val) out += val;
            i = close + 1;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

inline std::string strip_toml(const std::string& line) {
    // Trims whitespace and cuts "#" comments outside quoted strings.
    std::string out;
    bool in_string = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (c == '#' && !in_string) break;
        out.push_back(c);
    }
    size_t b = out.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = out.find_last_not_of(" \t\r");
    return out.substr(b, e - b + 1);
}

inline TomlValue parse_toml_scalar(const std::string& raw, size_t line_no) {
    TomlValue v;
    if (raw.empty()) throw Error("empty value at config line " + std::to_string(line_no));
    if (raw.front() == '"') {
        if (raw.size() < 2 || raw.back() != '"')
            throw Error("unterminated string at config line " + std::to_string(line_no));
        std::string s;
        for (size_t i = 1; i + 1 < raw.size(); ++i) {
            if (raw[i] == '\\' && i + 2 < raw.size() + 1) {
                char c = raw[++i];
                switch (c) {
                    case 'n': s.push_back('\n'); break;
                    case 't': s.push_back('\t'); break;
                    case 'r': s.push_back('\r'); break;
                    case '"': s.push_back('"'); break;
                    case '\\': s.push_back('\\'); break;
                    default:
                        throw Error("unsupported escape \\" + std::string(1, c) +
                                    " at config line " + std::to_string(line_no));
                }
            } else {
                s.push_back(raw[i]);
            }
        }
        v.kind = TomlValue::Kind::string;
        v.str = interpolate_env(s, line_no);
        return v;
    }
    if (raw == "true" || raw == "false") {
        v.kind = TomlValue::Kind::boolean;
        v.bool_val = raw == "true";
        return v;
    }
    if (raw == "inf" || raw == "+inf") {
        v.kind = TomlValue::Kind::floating;
        v.float_val = std::numeric_limits<double>::infinity();
        return v;
    }
    if (raw.find('.') != std::string::npos || raw.find('e') != std::string::npos ||
        raw.find('E') != std::string::npos) {
        try {
            size_t used = 0;
            v.float_val = std::stod(raw, &used);
            if (used != raw.size()) throw std::invalid_argument(raw);
        } catch (const std::exception&) {
            throw Error("bad float '" + raw + "' at config line " + std::to_string(line_no));
        }
        v.kind = TomlValue::Kind::floating;
        return v;
    }
    try {
        size_t used = 0;
        v.int_val = std::stoll(raw, &used);
        if (used != raw.size()) throw std::invalid_argument(raw);
    } catch (const std::exception&) {
        throw Error("bad value '" + raw + "' at config line " + std::to_string(line_no));
    }
    v.kind = TomlValue::Kind::integer;
    return v;
}

inline TomlValue parse_toml_value(const std::string& raw, size_t line_no) {
    if (!raw.empty() && raw.front() == '[') {
        if (raw.back() != ']')
            throw Error("unterminated array at config line " + std::to_string(line_no));
        TomlValue v;
        v.kind = TomlValue::Kind::array;
        std::string body = raw.substr(1, raw.size() - 2);
        std::string item;
        bool in_string = false;
        auto flush = [&]() {
            size_t b = item.find_first_not_of(" \t");
            if (b == std::string::npos) {
                item.clear();
                return;
            }
            size_t e = item.find_last_not_of(" \t");
            v.array.push_back(parse_toml_scalar(item.substr(b, e - b + 1), line_no));
            item.clear();
        };
        for (size_t i = 0; i < body.size(); ++i) {
            char c = body[i];
            if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_string = !in_string;
            if (c == ',' && !in_string) {
                flush();
            } else {
                item.push_back(c);
            }
        }
        flush();
        return v;
    }
    return parse_toml_scalar(raw, line_no);
}

}  // namespace detail

inline TomlTable parse_toml(const std::string& text) {
    TomlTable table;
    std::istringstream in(text);
    std::string line;
    std::string section;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = detail::strip_toml(line);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3)
                throw Error("bad section header at config line " + std::to_string(line_no));
            section = s.substr(1, s.size() - 2);
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw Error("expected key = value at config line " + std::to_string(line_no));
        std::string key = s.substr(0, eq);
        size_t ke = key.find_last_not_of(" \t");
        if (ke == std::string::npos)
            throw Error("missing key at config line " + std::to_string(line_no));
        key = key.substr(0, ke + 1);
        std::string raw = s.substr(eq + 1);
        size_t vb = raw.find_first_not_of(" \t");
        if (vb == std::string::npos)
            throw Error("missing value at config line " + std::to_string(line_no));
        table.set(section, key, detail::parse_toml_value(raw.substr(vb), line_no));
    }
    return table;
}

inline TomlTable parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_toml(buf.str());
}

}  // namespace ragleak
