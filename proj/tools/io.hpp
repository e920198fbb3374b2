#ifndef HRPOT_TOOLS_IO_HPP
#define HRPOT_TOOLS_IO_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "hrpot/margins.hpp"
#include "hrpot/variogram.hpp"

// File formats of the command line tool. Data files are plain CSV with a
// mandatory header row, one observation per row, one component per column.
// Location files are CSV with header label,x or label,x,y. Floats are
// written with 17 significant digits so a read-back restores the value.

namespace hrpot::cli {

// Bad usage or malformed input content. The tool exits with code 2.
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string &msg) : std::runtime_error(msg) {}
};

std::string format_double(double x);

// Strict full-token parse. Accepts inf and nan spellings like strtod does;
// missing-value handling is the reader's job.
bool parse_number(const std::string &token, double &out);

struct DataTable {
    std::vector<std::string> header;
    SampleMatrix data;
};

// Reads a data CSV and tags it with the given margin scale. Empty cells and
// the tokens na/nan/null are missing values (DomainError, exit 4); any other
// non-numeric cell is a UsageError naming the line.
DataTable read_data_csv(const std::string &path, MarginScale scale);

LocationSet read_locations_csv(const std::string &path);

void write_data_csv(const std::string &path, const SampleMatrix &data,
                    const std::vector<std::string> &labels);

std::string read_text_file(const std::string &path);
void write_text_file(const std::string &path, const std::string &text);

} // namespace hrpot::cli

#endif
