#include "io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hrpot/errors.hpp"

namespace hrpot::cli {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

bool parse_number(const std::string &token, double &out) {
    if (token.empty()) return false;
    const char *begin = token.c_str();
    char *end = nullptr;
    out = std::strtod(begin, &end);
    return end == begin + token.size();
}

namespace {

std::string trim(const std::string &s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_line(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(trim(cur));
    return out;
}

bool is_missing_token(const std::string &t) {
    if (t.empty()) return true;
    std::string low;
    for (char ch : t) low += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return low == "na" || low == "nan" || low == "null";
}

std::vector<std::string> read_lines(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    if (in.bad()) throw IoError("read failed: " + path);
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    return lines;
}

std::string where(const std::string &path, std::size_t line_no) {
    return path + ": line " + std::to_string(line_no);
}

} // namespace

DataTable read_data_csv(const std::string &path, MarginScale scale) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty()) throw UsageError(path + ": empty file, expected a header row");

    DataTable t;
    t.header = split_line(lines[0]);
    bool all_numeric = true;
    for (const auto &h : t.header) {
        double v;
        if (!parse_number(h, v)) {
            all_numeric = false;
            break;
        }
    }
    if (all_numeric)
        throw UsageError(where(path, 1) + ": looks like data, expected a header row of names");
    for (const auto &h : t.header)
        if (h.empty()) throw UsageError(where(path, 1) + ": empty column name");

    const std::size_t width = t.header.size();
    const std::size_t n = lines.size() - 1;
    if (n == 0) throw UsageError(path + ": no data rows");
    t.data = SampleMatrix(n, width, scale);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t line_no = i + 2;
        const auto cells = split_line(lines[i + 1]);
        if (cells.size() != width)
            throw UsageError(where(path, line_no) + ": expected " + std::to_string(width) +
                             " cells, got " + std::to_string(cells.size()));
        for (std::size_t j = 0; j < width; ++j) {
            if (is_missing_token(cells[j]))
                throw DomainError(where(path, line_no) + ", column " + std::to_string(j + 1) +
                                  ": missing value");
            double v;
            if (!parse_number(cells[j], v))
                throw UsageError(where(path, line_no) + ": not a number: " + cells[j]);
            t.data.at(i, j) = v;
        }
    }
    return t;
}

LocationSet read_locations_csv(const std::string &path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty())
        throw UsageError(path + ": empty file, expected header label,x or label,x,y");

    const auto head = split_line(lines[0]);
    if (head.size() != 2 && head.size() != 3)
        throw UsageError(where(path, 1) + ": expected header label,x or label,x,y");
    {
        double v;
        if (parse_number(head[1], v))
            throw UsageError(where(path, 1) + ": expected a header row, found numbers");
    }
    const std::size_t dim = head.size() - 1;

    LocationSet locs;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        const auto cells = split_line(lines[i]);
        if (cells.size() != head.size())
            throw UsageError(where(path, line_no) + ": expected " + std::to_string(head.size()) +
                             " cells, got " + std::to_string(cells.size()));
        if (cells[0].empty()) throw UsageError(where(path, line_no) + ": empty label");
        std::vector<double> p(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            if (!parse_number(cells[1 + d], p[d]) || !std::isfinite(p[d]))
                throw UsageError(where(path, line_no) + ": not a coordinate: " + cells[1 + d]);
        }
        locs.labels.push_back(cells[0]);
        locs.points.push_back(std::move(p));
    }
    if (locs.points.empty()) throw UsageError(path + ": no locations");
    try {
        locs.validate();
    } catch (const Error &e) {
        throw UsageError(path + ": " + e.what());
    }
    return locs;
}

void write_data_csv(const std::string &path, const SampleMatrix &data,
                    const std::vector<std::string> &labels) {
    if (labels.size() != data.components())
        throw DomainError("write_data_csv: label count does not match columns");
    std::string out;
    for (std::size_t j = 0; j < labels.size(); ++j) {
        if (j > 0) out += ',';
        out += labels[j];
    }
    out += '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
        for (std::size_t j = 0; j < data.components(); ++j) {
            if (j > 0) out += ',';
            out += format_double(data.at(i, j));
        }
        out += '\n';
    }
    write_text_file(path, out);
}

std::string read_text_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path);
    return ss.str();
}

void write_text_file(const std::string &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    out.close();
    if (!out) throw IoError("write failed: " + path);
}

} // namespace hrpot::cli
