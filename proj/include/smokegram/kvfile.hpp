#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace smokegram::kv {

// Versioned key-value text: first line "smokegram-kv v<N>", then one
// "key<space>value" per line, '#' comments. Keys keep insertion order so a
// written file is byte-reproducible. Used for config files, dataset sidecar
// metadata and run manifests.
class File {
public:
    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);
    void set_int(const std::string& key, long long value);
    void set_uint(const std::string& key, unsigned long long value);

    bool has(const std::string& key) const;
    const std::string& get(const std::string& key) const; // throws ParseError if absent
    std::optional<std::string> find(const std::string& key) const;
    double get_double(const std::string& key) const;
    long long get_int(const std::string& key) const;
    unsigned long long get_uint(const std::string& key) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

    std::string serialize() const;
    static File parse(const std::string& text, const std::string& context);

    void write_file(const std::string& path) const;
    static File read_file(const std::string& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

} // namespace smokegram::kv
