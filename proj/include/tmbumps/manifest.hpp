#ifndef TMBUMPS_MANIFEST_HPP
#define TMBUMPS_MANIFEST_HPP

#include <string>
#include <utility>
#include <vector>

namespace tmbumps {

inline constexpr const char* kToolVersion = "0.1.0";

/// Serialized alongside every command's outputs; re-running with the same
/// manifest reproduces the outputs bit for bit for deterministic commands.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> flags;  // flag -> value
    unsigned long seed = 0;
    std::string version = kToolVersion;
    std::string timestamp;  // ISO-8601 UTC; informational only
    std::vector<std::pair<std::string, std::string>> input_hashes;  // path -> fnv1a64

    void add_flag(const std::string& name, const std::string& value);
    void hash_input(const std::string& path);

    void write(const std::string& path) const;
    static RunManifest read(const std::string& path);
};

std::string iso8601_now();

}  // namespace tmbumps

#endif
