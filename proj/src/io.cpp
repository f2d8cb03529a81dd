#include "tmbumps/io.hpp"

#include <cstdio>
#include <fstream>

#include "tmbumps/errors.hpp"

namespace tmbumps::io {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string file_hash(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("file_hash: cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char c;
    while (f.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

void JsonWriter::comma() {
    if (!first_.empty()) {
        if (!first_.back()) os_ << ", ";
        first_.back() = false;
    }
}

void JsonWriter::key(const std::string& k) {
    comma();
    os_ << '"' << json_escape(k) << "\": ";
}

JsonWriter& JsonWriter::begin_object() {
    if (!first_.empty()) comma();
    os_ << '{';
    first_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_object() {
    os_ << '}';
    first_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::begin_array(const std::string& k) {
    key(k);
    os_ << '[';
    first_.push_back(true);
    return *this;
}

JsonWriter& JsonWriter::end_array() {
    os_ << ']';
    first_.pop_back();
    return *this;
}

JsonWriter& JsonWriter::field(const std::string& k, double v) {
    key(k);
    os_ << fmt17(v);
    return *this;
}

JsonWriter& JsonWriter::field(const std::string& k, long v) {
    key(k);
    os_ << v;
    return *this;
}

JsonWriter& JsonWriter::field(const std::string& k, bool v) {
    key(k);
    os_ << (v ? "true" : "false");
    return *this;
}

JsonWriter& JsonWriter::field(const std::string& k, const std::string& v) {
    key(k);
    os_ << '"' << json_escape(v) << '"';
    return *this;
}

JsonWriter& JsonWriter::raw_field(const std::string& k, const std::string& raw) {
    key(k);
    os_ << raw;
    return *this;
}

JsonWriter& JsonWriter::element(double v) {
    comma();
    os_ << fmt17(v);
    return *this;
}

JsonWriter& JsonWriter::element(const std::string& v) {
    comma();
    os_ << '"' << json_escape(v) << '"';
    return *this;
}

}  // namespace tmbumps::io
