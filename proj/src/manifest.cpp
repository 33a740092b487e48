#include "wienerlab/manifest.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "wienerlab/errors.hpp"
#include "wienerlab/norms.hpp"

namespace wienerlab {
namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    for (char c : key) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-')) return false;
    }
    return key.find("..") == std::string::npos;
}

bool is_integer_text(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    // Leading zeros would not survive the JSON round trip.
    if (s[i] == '0' && s.size() > i + 1) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return s.size() <= 18;
}

void flatten(const nlohmann::json& j, const std::string& prefix, Manifest& out) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        const auto& v = it.value();
        if (v.is_object()) {
            flatten(v, key, out);
        } else if (v.is_boolean()) {
            out.set(key, v.get<bool>());
        } else if (v.is_number_unsigned()) {
            out.set(key, v.get<std::uint64_t>());
        } else if (v.is_number_integer()) {
            out.set(key, v.get<std::int64_t>());
        } else if (v.is_number_float()) {
            out.set(key, v.get<double>());
        } else if (v.is_string()) {
            out.set(key, v.get<std::string>());
        } else {
            throw ValidationError(key + ": unsupported JSON value");
        }
    }
}

}  // namespace

std::string format_double(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

Manifest Manifest::parse(const std::string& text) {
    Manifest m;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("manifest line " + std::to_string(number) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) {
            throw ValidationError("manifest line " + std::to_string(number) + ": bad key '" + key + "'");
        }
        if (m.has(key)) throw ValidationError("manifest line " + std::to_string(number) + ": duplicate key " + key);
        m.values_[key] = trim(line.substr(eq + 1));
    }
    return m;
}

Manifest Manifest::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("manifest: JSON root must be an object");
    Manifest m;
    flatten(j, "", m);
    return m;
}

Manifest Manifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("manifest: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return from_json(nlohmann::json::parse(text));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("manifest " + path + ": " + e.what());
        }
    }
    return parse(text);
}

std::string Manifest::serialize() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
    return out;
}

nlohmann::json Manifest::to_json() const {
    nlohmann::json root = nlohmann::json::object();
    for (const auto& [key, value] : values_) {
        nlohmann::json* node = &root;
        std::size_t start = 0;
        for (;;) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
            if (dot == std::string::npos) {
                if (node->contains(part)) throw ValidationError(key + ": clashes with a section of the same name");
                if (value == "true" || value == "false") {
                    (*node)[part] = value == "true";
                } else if (is_integer_text(value)) {
                    (*node)[part] = std::stoll(value);
                } else {
                    (*node)[part] = value;
                }
                break;
            }
            node = &(*node)[part];
            if (!node->is_object() && !node->is_null()) {
                throw ValidationError(key + ": section " + part + " is also a value");
            }
            start = dot + 1;
        }
    }
    return root;
}

void Manifest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ValidationError("manifest: cannot write " + path);
    const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    if (json) {
        out << to_json().dump(2) << "\n";
    } else {
        out << serialize();
    }
}

std::string Manifest::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : serialize()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void Manifest::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw ValidationError("manifest: bad key '" + key + "'");
    if (value.find('\n') != std::string::npos || value.find('#') != std::string::npos) {
        throw ValidationError(key + ": value may not contain newlines or '#'");
    }
    values_[key] = trim(value);
}

void Manifest::set(const std::string& key, double value) { set(key, format_double(value)); }
void Manifest::set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
void Manifest::set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
void Manifest::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

void Manifest::merge(const Manifest& other) {
    for (const auto& [k, v] : other.values_) values_[k] = v;
}

std::string Manifest::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Manifest::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return parse_exponent(it->second);
    } catch (const std::exception&) {
        throw ValidationError(key + ": expected a number, got '" + it->second + "'");
    }
}

std::int64_t Manifest::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t used = 0;
    try {
        const long long v = std::stoll(it->second, &used, 0);
        if (used == it->second.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(key + ": expected an integer, got '" + it->second + "'");
}

std::uint64_t Manifest::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::size_t used = 0;
    try {
        if (!it->second.empty() && it->second[0] != '-') {
            const unsigned long long v = std::stoull(it->second, &used, 0);
            if (used == it->second.size()) return v;
        }
    } catch (const std::exception&) {
    }
    throw ValidationError(key + ": expected a non-negative integer, got '" + it->second + "'");
}

bool Manifest::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ValidationError(key + ": expected true or false, got '" + it->second + "'");
}

std::string Manifest::require_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ValidationError(key + ": missing");
    return it->second;
}

}  // namespace wienerlab
