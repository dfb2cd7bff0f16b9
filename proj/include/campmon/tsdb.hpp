#pragma once

#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "campmon/errors.hpp"
#include "campmon/types.hpp"

namespace campmon {

// One sample on the wire:
//   put <metric> <timestamp> <value> <k1>=<v1> <k2>=<v2> ...
// single-space separated, tag order preserved.
struct PutLine {
    std::string metric;
    Timestamp timestamp = 0;
    double value = 0.0;
    std::vector<std::pair<std::string, std::string>> tags;

    bool operator==(const PutLine&) const = default;
};

class PutParseError : public Error {
public:
    enum class Kind {
        BadOpcode,
        MissingField,
        BadTimestamp,
        BadValue,
        BadTag,
        DuplicateTagKey,
        BadSpacing,
    };

    PutParseError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Shortest decimal that round-trips the value; integral values are
// rendered without a decimal point.
std::string format_value(double v);

// Throws Error when the metric or a tag violates the grammar (whitespace
// anywhere, '=' in keys, empty components).
std::string encode_put(const PutLine& p);

// Strict single-space grammar; throws PutParseError with a distinct kind
// per failure. Tag values may contain '=' (split on the first one).
PutLine parse_put(const std::string& line);

// Append-only file store, one put-line log per (metric, tags) key under a
// root directory. Reads replay the log with last-write-wins on duplicate
// timestamps. One writer per key; readers are independent.
class SeriesStore {
public:
    explicit SeriesStore(std::string root);

    void append(const PutLine& p);
    void flush();

    // Points with timestamp in [t_begin, t_end), deduplicated and sorted.
    // A key with no log file reads as an empty series.
    RawSeries read(const std::string& metric,
                   const std::map<std::string, std::string>& tags,
                   Timestamp t_begin = 0,
                   Timestamp t_end = std::numeric_limits<Timestamp>::max()) const;

    struct Key {
        std::string metric;
        std::map<std::string, std::string> tags;
    };
    // Every key with a log file under the root.
    std::vector<Key> list_keys() const;

    const std::string& root() const { return root_; }

    // Filesystem-safe file stem for a key (used for log file names).
    static std::string key_stem(const std::string& metric,
                                const std::map<std::string, std::string>& tags);
    static Key parse_key_stem(const std::string& stem);

private:
    std::string path_for(const std::string& metric,
                         const std::map<std::string, std::string>& tags) const;

    std::string root_;
    std::map<std::string, std::unique_ptr<std::ofstream>> writers_;
};

} // namespace campmon
