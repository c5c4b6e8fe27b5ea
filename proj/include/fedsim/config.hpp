#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fedsim {

/// Flat key-value document: one "key = value" per line, '#' comments,
/// insertion order preserved so serialization is deterministic.
class KvDoc {
public:
    static KvDoc parse(const std::string& text);
    static KvDoc load(const std::string& path);

    std::string serialize() const;
    void save(const std::string& path) const;

    void set(const std::string& key, const std::string& value);
    void set_int(const std::string& key, long long v);
    void set_u64(const std::string& key, std::uint64_t v);
    void set_double(const std::string& key, double v);  // round-trip precision
    void set_bool(const std::string& key, bool v);
    void set_int_list(const std::string& key, const std::vector<int>& v);

    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    bool operator==(const KvDoc& other) const { return entries_ == other.entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

/// FNV-1a over the serialized document, as a 16-hex-digit tag for filenames.
std::string config_hash(const KvDoc& doc);

/// Formats a double so it parses back to the identical value.
std::string format_double(double v);

}  // namespace fedsim
