#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace drpen {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int col_index(const std::string& name) const {
        for (std::size_t j = 0; j < header.size(); ++j)
            if (header[j] == name) return static_cast<int>(j);
        return -1;
    }
};

namespace detail {

// One RFC-4180 record; handles quoted fields, embedded commas/newlines,
// doubled quotes, and CRLF line ends. Returns false at end of stream.
inline bool read_record(std::istream& in, std::vector<std::string>& fields) {
    fields.clear();
    int c = in.get();
    if (c == EOF) return false;
    std::string field;
    bool quoted = false;
    for (;;) {
        if (quoted) {
            if (c == EOF) throw std::runtime_error("csv: unterminated quoted field");
            if (c == '"') {
                int nxt = in.get();
                if (nxt == '"') { field.push_back('"'); }
                else { quoted = false; c = nxt; continue; }
            } else {
                field.push_back(static_cast<char>(c));
            }
        } else {
            if (c == EOF || c == '\n') {
                if (!field.empty() && field.back() == '\r') field.pop_back();
                fields.push_back(field);
                return true;
            }
            if (c == ',') { fields.push_back(field); field.clear(); }
            else if (c == '"' && field.empty()) quoted = true;
            else field.push_back(static_cast<char>(c));
        }
        c = in.get();
    }
}

}  // namespace detail

inline CsvTable read_csv(std::istream& in) {
    CsvTable t;
    if (!detail::read_record(in, t.header))
        throw std::runtime_error("csv: empty input");
    std::vector<std::string> rec;
    while (detail::read_record(in, rec)) {
        if (rec.size() == 1 && rec[0].empty()) continue;  // blank line
        if (rec.size() != t.header.size())
            throw std::runtime_error("csv: row with " + std::to_string(rec.size()) +
                                     " fields, expected " + std::to_string(t.header.size()));
        t.rows.push_back(rec);
    }
    return t;
}

inline CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return read_csv(in);
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out.push_back(ch);
    }
    out += "\"";
    return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

}  // namespace drpen
