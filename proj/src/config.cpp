#include "hypergrad/config.hpp"

#include <fstream>
#include <sstream>

namespace hypergrad {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cfg;
    std::istringstream in(text);
    std::string line, section;
    std::int64_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("config: unterminated section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("config: empty section name at line " + std::to_string(lineno));
            cfg.sections_[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected key = value at line " + std::to_string(lineno));
        if (section.empty()) throw ConfigError("config: key outside any section at line " + std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config: empty key at line " + std::to_string(lineno));
        cfg.sections_[section][key] = value;
    }
    return cfg;
}

bool ConfigFile::has_section(const std::string& section) const { return sections_.count(section) > 0; }

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) throw ConfigError("config: missing section [" + section + "]");
    const auto kv = it->second.find(key);
    if (kv == it->second.end()) throw ConfigError("config: missing key '" + key + "' in [" + section + "]");
    return kv->second;
}

std::string ConfigFile::get_string_or(const std::string& section, const std::string& key,
                                      std::string fallback) const {
    return has(section, key) ? get_string(section, key) : std::move(fallback);
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
    const std::string raw = get_string(section, key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' in [" + section + "] is not a number: '" + raw + "'");
    }
}

double ConfigFile::get_double_or(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
    const std::string raw = get_string(section, key);
    try {
        std::size_t pos = 0;
        const std::int64_t v = std::stoll(raw, &pos);
        if (pos != raw.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config: key '" + key + "' in [" + section + "] is not an integer: '" + raw + "'");
    }
}

std::int64_t ConfigFile::get_int_or(const std::string& section, const std::string& key,
                                    std::int64_t fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

bool ConfigFile::get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string raw = get_string(section, key);
    if (raw == "true" || raw == "1" || raw == "yes" || raw == "on") return true;
    if (raw == "false" || raw == "0" || raw == "no" || raw == "off") return false;
    throw ConfigError("config: key '" + key + "' in [" + section + "] is not a boolean: '" + raw + "'");
}

std::vector<std::string> ConfigFile::get_list(const std::string& section, const std::string& key) const {
    const std::string raw = get_string(section, key);
    std::vector<std::string> out;
    std::istringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    if (out.empty()) throw ConfigError("config: key '" + key + "' in [" + section + "] is an empty list");
    return out;
}

std::vector<double> ConfigFile::get_double_list(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_list(section, key)) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(item, &pos));
            if (pos != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ConfigError("config: list item '" + item + "' in [" + section + "]." + key +
                              " is not a number");
        }
    }
    return out;
}

void ConfigFile::set_override(const std::string& dotted_key, const std::string& value) {
    const auto dotpos = dotted_key.find('.');
    if (dotpos == std::string::npos || dotpos == 0 || dotpos + 1 == dotted_key.size())
        throw ConfigError("config: override must look like section.key=value, got '" + dotted_key + "'");
    sections_[dotted_key.substr(0, dotpos)][dotted_key.substr(dotpos + 1)] = value;
}

void ConfigFile::require_known_keys(const std::string& section, const std::set<std::string>& allowed) const {
    const auto it = sections_.find(section);
    if (it == sections_.end()) return;
    for (const auto& [key, value] : it->second)
        if (!allowed.count(key))
            throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
}

}  // namespace hypergrad
