#include "relasso/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "relasso/errors.hpp"

namespace relasso {
namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> items;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

double to_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
        throw ContractError("config key '" + key + "' has non-numeric value '" + value + "'");
    }
    return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
    KeyValueConfig config;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ContractError("config line " + std::to_string(line_no) +
                                " is not of the form key = value: '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        if (key.empty()) {
            throw ContractError("config line " + std::to_string(line_no) + " has an empty key");
        }
        config.entries_[key] = trim(line.substr(eq + 1));
    }
    return config;
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto hit = entries_.find(key);
    return hit == entries_.end() ? fallback : hit->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto hit = entries_.find(key);
    return hit == entries_.end() ? fallback : to_double(key, hit->second);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
    return static_cast<int>(get_double(key, fallback));
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto hit = entries_.find(key);
    if (hit == entries_.end()) return fallback;
    return std::strtoull(hit->second.c_str(), nullptr, 10);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto hit = entries_.find(key);
    if (hit == entries_.end()) return fallback;
    if (hit->second == "true" || hit->second == "1" || hit->second == "yes") return true;
    if (hit->second == "false" || hit->second == "0" || hit->second == "no") return false;
    throw ContractError("config key '" + key + "' has non-boolean value '" + hit->second + "'");
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key,
                                                    const std::vector<double>& fallback) const {
    const auto hit = entries_.find(key);
    if (hit == entries_.end()) return fallback;
    std::vector<double> out;
    for (const std::string& item : split_list(hit->second)) out.push_back(to_double(key, item));
    return out;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              const std::vector<int>& fallback) const {
    const auto hit = entries_.find(key);
    if (hit == entries_.end()) return fallback;
    std::vector<int> out;
    for (const std::string& item : split_list(hit->second)) {
        out.push_back(static_cast<int>(to_double(key, item)));
    }
    return out;
}

std::vector<std::string> KeyValueConfig::get_string_list(
    const std::string& key, const std::vector<std::string>& fallback) const {
    const auto hit = entries_.find(key);
    if (hit == entries_.end()) return fallback;
    return split_list(hit->second);
}

}  // namespace relasso
