#include "csvio.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include "errors.hpp"
#include "measure_spec.hpp"

namespace dw {

void CsvWriter::comment(const std::string& text) { comments_.push_back(text); }

void CsvWriter::header(std::vector<std::string> columns) { columns_ = std::move(columns); }

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size())
        throw ParseError("csv: row width does not match header");
    rows_.push_back(cells);
}

void CsvWriter::row_values(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(format_double(v));
    row(s);
}

void CsvWriter::write(std::ostream& out) const {
    for (const auto& c : comments_) out << "# " << c << "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i)
        out << columns_[i] << (i + 1 < columns_.size() ? "," : "");
    out << "\n";
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i)
            out << r[i] << (i + 1 < r.size() ? "," : "");
        out << "\n";
    }
}

void CsvWriter::write_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ParseError("csv: cannot write '" + path + "'");
    write(out);
}

CsvFile read_csv(std::istream& in) {
    CsvFile f;
    std::string line;
    bool have_header = false;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::string cur;
        std::istringstream ss(s);
        while (std::getline(ss, cur, ',')) out.push_back(cur);
        if (!s.empty() && s.back() == ',') out.emplace_back();
        return out;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string c = line.substr(1);
            if (!c.empty() && c[0] == ' ') c.erase(0, 1);
            f.comments.push_back(c);
            continue;
        }
        if (!have_header) {
            f.columns = split(line);
            have_header = true;
        } else {
            auto cells = split(line);
            if (cells.size() != f.columns.size())
                throw ParseError("csv: row width does not match header");
            f.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw ParseError("csv: missing header row");
    return f;
}

CsvFile read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("csv: cannot open '" + path + "'");
    return read_csv(in);
}

double CsvFile::value(std::size_t row, const std::string& column) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
        if (columns[i] == column) {
            const std::string& cell = rows.at(row).at(i);
            if (cell == "inf") return std::numeric_limits<double>::infinity();
            if (cell == "-inf") return -std::numeric_limits<double>::infinity();
            if (cell == "nan") return std::numeric_limits<double>::quiet_NaN();
            return std::stod(cell);
        }
    }
    throw ParseError("csv: no column '" + column + "'");
}

} // namespace dw
