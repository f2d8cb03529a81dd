#include "tmbumps/manifest.hpp"

#include <ctime>
#include <fstream>

#include "json.hpp"
#include "tmbumps/errors.hpp"
#include "tmbumps/io.hpp"

namespace tmbumps {

std::string iso8601_now() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void RunManifest::add_flag(const std::string& name, const std::string& value) {
    flags.emplace_back(name, value);
}

void RunManifest::hash_input(const std::string& path) {
    input_hashes.emplace_back(path, io::file_hash(path));
}

void RunManifest::write(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("manifest: cannot write " + path);
    io::JsonWriter w(f);
    w.begin_object();
    w.field("command", command);
    w.begin_array("flags");
    for (const auto& [k, v] : flags) {
        w.begin_object();
        w.field("name", k);
        w.field("value", v);
        w.end_object();
    }
    w.end_array();
    w.field("seed", static_cast<long>(seed));
    w.field("version", version);
    w.field("timestamp", timestamp);
    w.begin_array("input_hashes");
    for (const auto& [k, v] : input_hashes) {
        w.begin_object();
        w.field("path", k);
        w.field("fnv1a64", v);
        w.end_object();
    }
    w.end_array();
    w.end_object();
    f << '\n';
}

RunManifest RunManifest::read(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("manifest: cannot open " + path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("manifest: ") + e.what());
    }
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    for (const auto& fl : j.at("flags"))
        m.flags.emplace_back(fl.at("name").get<std::string>(), fl.at("value").get<std::string>());
    m.seed = j.at("seed").get<unsigned long>();
    m.version = j.at("version").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    if (j.contains("input_hashes"))
        for (const auto& ih : j["input_hashes"])
            m.input_hashes.emplace_back(ih.at("path").get<std::string>(),
                                        ih.at("fnv1a64").get<std::string>());
    return m;
}

}  // namespace tmbumps
