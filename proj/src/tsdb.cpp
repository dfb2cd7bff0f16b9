#include "campmon/tsdb.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <set>

namespace fs = std::filesystem;

namespace campmon {

std::string format_value(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

bool has_whitespace(const std::string& s) {
    return std::any_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

void check_component(const std::string& s, const char* what, bool forbid_equals) {
    if (s.empty()) throw Error(std::string("encode_put: empty ") + what);
    if (has_whitespace(s))
        throw Error(std::string("encode_put: whitespace in ") + what + ": '" + s + "'");
    if (forbid_equals && s.find('=') != std::string::npos)
        throw Error(std::string("encode_put: '=' in ") + what + ": '" + s + "'");
}

} // namespace

std::string encode_put(const PutLine& p) {
    check_component(p.metric, "metric", false);
    if (p.timestamp < 0) throw Error("encode_put: negative timestamp");
    if (!std::isfinite(p.value)) throw Error("encode_put: non-finite value");

    std::set<std::string> keys;
    std::string out = "put " + p.metric + ' ' + std::to_string(p.timestamp) + ' ' +
                      format_value(p.value);
    for (const auto& [k, v] : p.tags) {
        check_component(k, "tag key", true);
        check_component(v, "tag value", false);
        if (!keys.insert(k).second) throw Error("encode_put: duplicate tag key: " + k);
        out += ' ';
        out += k;
        out += '=';
        out += v;
    }
    return out;
}

PutLine parse_put(const std::string& line) {
    using Kind = PutParseError::Kind;

    std::vector<std::string> tokens;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t next = line.find(' ', pos);
        std::string tok =
            next == std::string::npos ? line.substr(pos) : line.substr(pos, next - pos);
        if (tok.empty())
            throw PutParseError(Kind::BadSpacing, "parse_put: empty token (strict single-space grammar)");
        tokens.push_back(std::move(tok));
        if (next == std::string::npos) break;
        pos = next + 1;
    }

    if (tokens.empty() || tokens[0] != "put")
        throw PutParseError(Kind::BadOpcode,
                            "parse_put: expected 'put' opcode" +
                                (tokens.empty() ? std::string() : ", got '" + tokens[0] + "'"));
    if (tokens.size() < 4)
        throw PutParseError(Kind::MissingField, "parse_put: need metric, timestamp and value");

    PutLine p;
    p.metric = tokens[1];

    {
        const std::string& t = tokens[2];
        auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), p.timestamp);
        if (ec != std::errc{} || end != t.data() + t.size() || p.timestamp < 0)
            throw PutParseError(Kind::BadTimestamp, "parse_put: bad timestamp '" + t + "'");
    }
    {
        const std::string& t = tokens[3];
        auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), p.value);
        if (ec != std::errc{} || end != t.data() + t.size() || !std::isfinite(p.value))
            throw PutParseError(Kind::BadValue, "parse_put: bad value '" + t + "'");
    }

    std::set<std::string> keys;
    for (std::size_t i = 4; i < tokens.size(); ++i) {
        const std::string& t = tokens[i];
        std::size_t eq = t.find('=');
        if (eq == std::string::npos || eq == 0 || eq == t.size() - 1)
            throw PutParseError(Kind::BadTag, "parse_put: malformed tag '" + t + "'");
        std::string key = t.substr(0, eq);
        if (!keys.insert(key).second)
            throw PutParseError(Kind::DuplicateTagKey, "parse_put: duplicate tag key '" + key + "'");
        p.tags.emplace_back(std::move(key), t.substr(eq + 1));
    }
    return p;
}

namespace {

bool is_safe_char(unsigned char c) {
    return std::isalnum(c) || c == '.' || c == '_' || c == '-';
}

std::string escape_component(const std::string& s) {
    static const char* digits = "0123456789ABCDEF";
    std::string out;
    out.reserve(s.size());
    for (unsigned char c : s) {
        if (is_safe_char(c)) {
            out += static_cast<char>(c);
        } else {
            out += '%';
            out += digits[c >> 4];
            out += digits[c & 0xf];
        }
    }
    return out;
}

int hex_digit(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}

std::string unescape_component(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size()) {
            int hi = hex_digit(s[i + 1]);
            int lo = hex_digit(s[i + 2]);
            if (hi >= 0 && lo >= 0) {
                out += static_cast<char>((hi << 4) | lo);
                i += 2;
                continue;
            }
        }
        out += s[i];
    }
    return out;
}

} // namespace

std::string SeriesStore::key_stem(const std::string& metric,
                                  const std::map<std::string, std::string>& tags) {
    // Comma-separated, tags sorted by key (std::map order) so the same key
    // always maps to the same file regardless of wire tag order. ',' and '='
    // are percent-escaped inside components, so the literal ones below are
    // unambiguous separators.
    std::string stem = escape_component(metric);
    for (const auto& [k, v] : tags)
        stem += ',' + escape_component(k) + '=' + escape_component(v);
    return stem;
}

SeriesStore::Key SeriesStore::parse_key_stem(const std::string& stem) {
    Key key;
    std::size_t pos = 0;
    bool first = true;
    while (pos <= stem.size()) {
        std::size_t next = stem.find(',', pos);
        std::string item =
            next == std::string::npos ? stem.substr(pos) : stem.substr(pos, next - pos);
        if (first) {
            key.metric = unescape_component(item);
            first = false;
        } else {
            std::size_t eq = item.find('=');
            if (eq != std::string::npos)
                key.tags[unescape_component(item.substr(0, eq))] =
                    unescape_component(item.substr(eq + 1));
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return key;
}

SeriesStore::SeriesStore(std::string root) : root_(std::move(root)) {
    std::error_code ec;
    fs::create_directories(root_, ec);
    if (ec) throw IoError("cannot create store root", root_);
}

std::string SeriesStore::path_for(const std::string& metric,
                                  const std::map<std::string, std::string>& tags) const {
    return (fs::path(root_) / (key_stem(metric, tags) + ".put")).string();
}

void SeriesStore::append(const PutLine& p) {
    std::map<std::string, std::string> tags(p.tags.begin(), p.tags.end());
    std::string path = path_for(p.metric, tags);
    auto it = writers_.find(path);
    if (it == writers_.end()) {
        auto stream = std::make_unique<std::ofstream>(path, std::ios::app);
        if (!*stream) throw IoError("cannot open for append", path);
        it = writers_.emplace(path, std::move(stream)).first;
    }
    *it->second << encode_put(p) << '\n';
    if (!*it->second) throw IoError("append failed", path);
}

void SeriesStore::flush() {
    for (auto& [path, stream] : writers_) {
        stream->flush();
        if (!*stream) throw IoError("flush failed", path);
    }
}

RawSeries SeriesStore::read(const std::string& metric,
                            const std::map<std::string, std::string>& tags,
                            Timestamp t_begin, Timestamp t_end) const {
    RawSeries out;
    out.metric = metric;
    out.tags = tags;

    std::string path = path_for(metric, tags);
    std::ifstream in(path);
    if (!in) return out;  // unknown key reads as empty

    // Replay in write order; the most recent value wins per timestamp.
    std::map<Timestamp, double> latest;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        PutLine p;
        try {
            p = parse_put(line);
        } catch (const PutParseError& e) {
            throw IoError(std::string("corrupt put line ") + std::to_string(lineno) + " (" +
                              e.what() + ")",
                          path);
        }
        if (p.timestamp >= t_begin && p.timestamp < t_end) latest[p.timestamp] = p.value;
    }
    out.points.assign(latest.begin(), latest.end());
    return out;
}

std::vector<SeriesStore::Key> SeriesStore::list_keys() const {
    std::vector<Key> keys;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root_, ec)) {
        if (!entry.is_regular_file()) continue;
        fs::path p = entry.path();
        if (p.extension() != ".put") continue;
        keys.push_back(parse_key_stem(p.stem().string()));
    }
    if (ec) throw IoError("cannot list store root", root_);
    std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
        return std::tie(a.metric, a.tags) < std::tie(b.metric, b.tags);
    });
    return keys;
}

} // namespace campmon
