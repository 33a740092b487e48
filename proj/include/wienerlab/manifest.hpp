#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace wienerlab {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kCodeVersion = "0.1.0";

/// Flat, line-oriented key/value configuration with dotted section paths:
///
///   # comment
///   grid.d = 1
///   dist.kind = gaussian
///
/// Keys are kept sorted so serialization is canonical.
class Manifest {
public:
    static Manifest parse(const std::string& text);
    static Manifest from_json(const nlohmann::json& j);
    /// Reads flat text, or JSON when the content starts with '{'.
    static Manifest load(const std::string& path);

    std::string serialize() const;
    /// Nested object; integers and booleans become JSON scalars, the rest strings.
    nlohmann::json to_json() const;
    /// Writes JSON for a .json path, flat text otherwise.
    void save(const std::string& path) const;

    /// FNV-1a 64 over the serialized text, as 16 hex digits.
    std::string hash() const;

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, const char* value) { set(key, std::string(value)); }
    void set(const std::string& key, double value);
    void set(const std::string& key, std::int64_t value);
    void set(const std::string& key, int value) { set(key, static_cast<std::int64_t>(value)); }
    void set(const std::string& key, std::uint64_t value);
    void set(const std::string& key, bool value);
    void erase(const std::string& key) { values_.erase(key); }
    /// Copies every entry of `other` over this one.
    void merge(const Manifest& other);

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Throws ValidationError naming the key when it is absent.
    std::string require_string(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return values_; }
    bool operator==(const Manifest& other) const { return values_ == other.values_; }

private:
    std::map<std::string, std::string> values_;
};

/// %.17g, so doubles survive a text round trip.
std::string format_double(double value);

}  // namespace wienerlab
