#ifndef TMBUMPS_IO_HPP
#define TMBUMPS_IO_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace tmbumps::io {

/// 17-significant-digit decimal rendering (round-trips doubles exactly).
std::string fmt17(double v);

/// FNV-1a 64-bit hash of a file's bytes, hex encoded; for run manifests.
std::string file_hash(const std::string& path);

/// Minimal deterministic JSON emitter: snake_case keys, insertion order,
/// floats via fmt17.
class JsonWriter {
public:
    explicit JsonWriter(std::ostream& os) : os_(os) {}

    JsonWriter& begin_object();
    JsonWriter& end_object();
    JsonWriter& begin_array(const std::string& key);
    JsonWriter& end_array();
    JsonWriter& field(const std::string& key, double v);
    JsonWriter& field(const std::string& key, long v);
    JsonWriter& field(const std::string& key, bool v);
    JsonWriter& field(const std::string& key, const std::string& v);
    JsonWriter& raw_field(const std::string& key, const std::string& raw);
    JsonWriter& element(double v);
    JsonWriter& element(const std::string& v);

private:
    void comma();
    void key(const std::string& k);
    std::ostream& os_;
    std::vector<bool> first_{};
};

std::string json_escape(const std::string& s);

}  // namespace tmbumps::io

#endif
