#include "smokegram/kvfile.hpp"

#include <fstream>
#include <sstream>

#include "smokegram/errors.hpp"
#include "smokegram/textio.hpp"
#include "smokegram/version.hpp"

namespace smokegram::kv {

void File::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
        if (k == key) {
            v = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void File::set_double(const std::string& key, double value) {
    set(key, textio::format_double(value));
}

void File::set_int(const std::string& key, long long value) {
    set(key, std::to_string(value));
}

void File::set_uint(const std::string& key, unsigned long long value) {
    set(key, std::to_string(value));
}

bool File::has(const std::string& key) const {
    return find(key).has_value();
}

std::optional<std::string> File::find(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            return v;
        }
    }
    return std::nullopt;
}

const std::string& File::get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
        if (k == key) {
            return v;
        }
    }
    throw ParseError("key-value file: missing key '" + key + "'");
}

double File::get_double(const std::string& key) const {
    return textio::parse_double(get(key), "key '" + key + "'");
}

long long File::get_int(const std::string& key) const {
    return textio::parse_int(get(key), "key '" + key + "'");
}

unsigned long long File::get_uint(const std::string& key) const {
    return textio::parse_uint64(get(key), "key '" + key + "'");
}

std::string File::serialize() const {
    std::ostringstream out;
    out << "smokegram-kv v" << kKvFormatVersion << "\n";
    for (const auto& [k, v] : entries_) {
        out << k << " " << v << "\n";
    }
    return out.str();
}

File File::parse(const std::string& text, const std::string& context) {
    File f;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    bool saw_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto trimmed = textio::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') {
            continue;
        }
        if (!saw_header) {
            if (trimmed.rfind("smokegram-kv v", 0) != 0) {
                throw ParseError(context + ": line 1: expected 'smokegram-kv v" +
                                 std::to_string(kKvFormatVersion) + "' header");
            }
            const auto ver = textio::parse_int(trimmed.substr(14),
                                               context + " format version");
            if (ver != kKvFormatVersion) {
                throw CompatibilityError(context + ": unsupported key-value version " +
                                         std::to_string(ver));
            }
            saw_header = true;
            continue;
        }
        const auto space = trimmed.find(' ');
        if (space == std::string_view::npos) {
            throw ParseError(context + ": line " + std::to_string(lineno) +
                             ": expected 'key value'");
        }
        f.set(std::string(trimmed.substr(0, space)),
              std::string(textio::trim(trimmed.substr(space + 1))));
    }
    if (!saw_header) {
        throw ParseError(context + ": empty key-value file");
    }
    return f;
}

void File::write_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw MissingFileError("cannot write '" + path + "'");
    }
    out << serialize();
    if (!out) {
        throw Error("write failed for '" + path + "'");
    }
}

File File::read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw MissingFileError("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

} // namespace smokegram::kv
