#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "swerect/errors.hpp"

namespace swerect::config {

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace detail

// Flat `key = value` configuration with [section] headers. Keys are stored
// qualified as "section.key"; getters record what was read so leftovers can
// be reported as unknown keys.
class Config {
  public:
    Config() = default;

    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": unterminated section header");
                }
                section = detail::trim(line.substr(1, line.size() - 2));
                if (section.empty()) {
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": empty section name");
                }
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected `key = value`");
            }
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string value = detail::trim(line.substr(eq + 1));
            if (key.empty()) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            }
            const std::string full = section.empty() ? key : section + "." + key;
            if (cfg.entries_.count(full)) {
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key `" +
                                  full + "`");
            }
            cfg.entries_[full] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        return parse_double(key, it->second);
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        const double d = parse_double(key, it->second);
        const int n = static_cast<int>(d);
        if (static_cast<double>(n) != d) {
            throw ConfigError("config key `" + key + "`: expected an integer, got `" +
                              it->second + "`");
        }
        return n;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        consumed_.insert(key);
        const std::string& v = it->second;
        if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
        if (v == "false" || v == "no" || v == "off" || v == "0") return false;
        throw ConfigError("config key `" + key + "`: expected a boolean, got `" + v + "`");
    }

    // Keys present in the file but never read by the scenario.
    std::vector<std::string> unread_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : entries_) {
            if (!consumed_.count(k)) out.push_back(k);
        }
        return out;
    }

    void require_all_read() const {
        const auto leftover = unread_keys();
        if (leftover.empty()) return;
        std::string msg = "unknown config keys:";
        for (const auto& k : leftover) msg += " " + k;
        throw ConfigError(msg);
    }

  private:
    static double parse_double(const std::string& key, const std::string& text) {
        const char* begin = text.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin || *end != '\0') {
            throw ConfigError("config key `" + key + "`: expected a number, got `" + text + "`");
        }
        return v;
    }

    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> consumed_;
};

}  // namespace swerect::config
