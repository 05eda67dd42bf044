#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace minsde {

// Shortest round-trip decimal for a double; locale-independent, so outputs
// are byte-stable across runs.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open output file: " + path);
        path_ = path;
    }

    void header(const std::string& line) { out_ << line << '\n'; }

    CsvWriter& field(const std::string& s) { sep(); row_ << s; return *this; }
    CsvWriter& field(const char* s) { sep(); row_ << s; return *this; }
    CsvWriter& field(double v) { sep(); row_ << fmt_double(v); return *this; }
    CsvWriter& field(std::int64_t v) { sep(); row_ << v; return *this; }
    CsvWriter& field(std::uint64_t v) { sep(); row_ << v; return *this; }
    CsvWriter& field(int v) { sep(); row_ << v; return *this; }
    CsvWriter& blank() { sep(); return *this; }

    void end_row() {
        out_ << row_.str() << '\n';
        row_.str(std::string());
        first_ = true;
    }

    void close() { out_.close(); }
    const std::string& path() const { return path_; }

private:
    void sep() {
        if (!first_) row_ << ',';
        first_ = false;
    }

    std::ofstream out_;
    std::ostringstream row_;
    std::string path_;
    bool first_ = true;
};

}
