#include "fedsim/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

}  // namespace

KvDoc KvDoc::parse(const std::string& text) {
    KvDoc doc;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        doc.set(key, trim(stripped.substr(eq + 1)));
    }
    return doc;
}

KvDoc KvDoc::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string KvDoc::serialize() const {
    std::string out;
    for (const auto& [key, value] : entries_) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    }
    return out;
}

void KvDoc::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path);
    out << serialize();
    if (!out) throw ConfigError("write failed: " + path);
}

void KvDoc::set(const std::string& key, const std::string& value) {
    for (auto& entry : entries_) {
        if (entry.first == key) {
            entry.second = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void KvDoc::set_int(const std::string& key, long long v) { set(key, std::to_string(v)); }

void KvDoc::set_u64(const std::string& key, std::uint64_t v) { set(key, std::to_string(v)); }

void KvDoc::set_double(const std::string& key, double v) { set(key, format_double(v)); }

void KvDoc::set_bool(const std::string& key, bool v) { set(key, v ? "true" : "false"); }

void KvDoc::set_int_list(const std::string& key, const std::vector<int>& v) {
    std::string joined;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) joined += ',';
        joined += std::to_string(v[i]);
    }
    set(key, joined);
}

bool KvDoc::has(const std::string& key) const { return get(key).has_value(); }

std::optional<std::string> KvDoc::get(const std::string& key) const {
    for (const auto& entry : entries_)
        if (entry.first == key) return entry.second;
    return std::nullopt;
}

std::string KvDoc::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

long long KvDoc::get_int(const std::string& key, long long fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stoll(*v);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected integer, got '" + *v + "'");
    }
}

std::uint64_t KvDoc::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stoull(*v);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected unsigned integer, got '" + *v + "'");
    }
}

double KvDoc::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    try {
        return std::stod(*v);
    } catch (const std::exception&) {
        throw ConfigError("key '" + key + "': expected number, got '" + *v + "'");
    }
}

bool KvDoc::get_bool(const std::string& key, bool fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1") return true;
    if (*v == "false" || *v == "0") return false;
    throw ConfigError("key '" + key + "': expected true/false, got '" + *v + "'");
}

std::vector<int> KvDoc::get_int_list(const std::string& key,
                                     const std::vector<int>& fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<int> out;
    std::istringstream in(*v);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        try {
            out.push_back(std::stoi(t));
        } catch (const std::exception&) {
            throw ConfigError("key '" + key + "': expected integer list, got '" + *v + "'");
        }
    }
    return out;
}

std::string config_hash(const KvDoc& doc) {
    const std::string text = doc.serialize();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace fedsim
